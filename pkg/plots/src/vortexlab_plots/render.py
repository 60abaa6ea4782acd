"""Render convergence figures and field heatmaps from results files.

Inputs are the harness's documented formats: the sweep ``errors.csv``
(columns row_kind, n, seed, norm_kind, sup_over_time_error, err_t*, ...)
and line-oriented ``.snap`` field files.  Rendering never touches the
inputs and is deterministic: fixed figure geometry and pinned PNG metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("convergence_loglog", "error_vs_time", "field_heatmap")

_PNG_METADATA = {"Software": "vortexlab-plots"}
_FIGSIZE = (6.4, 4.8)
_DPI = 110


class ParseError(ValueError):
    """Input did not match the documented format; message carries file:line."""


@dataclass
class PlotJob:
    kind: str
    inputs: list
    output: str
    norm_kind: str | None = None     # default: first norm present in the CSV

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ParseError(f"unknown figure kind {self.kind!r}; use one of {KINDS}")
        if not self.inputs:
            raise ParseError("at least one input file is required")
        out = Path(self.output).resolve()
        for p in self.inputs:
            if Path(p).resolve() == out:
                raise ParseError(f"output path {self.output} collides with input {p}")


@dataclass
class SweepTable:
    path: str
    times: list                      # per-time column labels as floats
    samples: list = field(default_factory=list)   # (n, seed, norm, sup, per_time)


def read_sweep_csv(path) -> SweepTable:
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ParseError(f"{path}:1: empty CSV")
    header = rows[0]
    required = ["row_kind", "n", "seed", "norm_kind", "sup_over_time_error"]
    if header[: len(required)] != required:
        raise ParseError(f"{path}:1: unexpected header {header[:5]}")
    time_cols = [(i, float(h[5:])) for i, h in enumerate(header) if h.startswith("err_t")]
    table = SweepTable(path=str(path), times=[t for _, t in time_cols])
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
        if row[0] != "sample":
            continue
        if row[-1] != "ok":
            continue
        try:
            n = int(row[1])
            seed = int(row[2])
            sup = float(row[4])
            per = [float(row[i]) for i, _ in time_cols]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad numeric field ({exc})") from None
        table.samples.append((n, seed, row[3], sup, per))
    if not table.samples:
        raise ParseError(f"{path}:1: no usable sample rows")
    return table


def read_snapshot(path):
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        if not header.startswith("# "):
            raise ParseError(f"{path}:1: missing snapshot header")
        meta = {}
        for token in header[2:].split():
            if "=" not in token:
                raise ParseError(f"{path}:1: malformed header token {token!r}")
            k, v = token.split("=", 1)
            meta[k] = v
        try:
            g = int(meta["g"])
            t = float(meta["time"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{path}:1: bad header ({exc})") from None
        values = np.empty((g, g))
        for i in range(g):
            line = f.readline()
            if not line:
                raise ParseError(f"{path}:{i + 2}: truncated snapshot")
            row = line.split()
            if len(row) != g:
                raise ParseError(f"{path}:{i + 2}: expected {g} values, found {len(row)}")
            try:
                values[i] = [float(v) for v in row]
            except ValueError as exc:
                raise ParseError(f"{path}:{i + 2}: bad value ({exc})") from None
    return t, values


def _pick_norm(table: SweepTable, requested):
    kinds = []
    for _, _, kind, _, _ in table.samples:
        if kind not in kinds:
            kinds.append(kind)
    if requested is None:
        return kinds[0]
    if requested not in kinds:
        raise ParseError(f"{table.path}: norm kind {requested!r} not present (have {kinds})")
    return requested


def _save(fig, output):
    fig.savefig(output, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def _render_convergence(job: PlotJob) -> dict:
    table = read_sweep_csv(job.inputs[0])
    kind = _pick_norm(table, job.norm_kind)
    pts = [(n, sup) for n, _, k, sup, _ in table.samples if k == kind]
    ns = sorted({n for n, _ in pts})
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    xs = np.array([n for n, _ in pts], dtype=float)
    ys = np.array([v for _, v in pts])
    ax.scatter(xs, ys, s=14, alpha=0.55, label="per-seed")
    means = np.array([np.mean([v for n, v in pts if n == m]) for m in ns])
    stds = np.array([np.std([v for n, v in pts if n == m]) for m in ns])
    drew_trend = len(ns) >= 2
    if drew_trend:
        ax.errorbar(ns, means, yerr=stds, fmt="o-", color="C1", capsize=4,
                    label="ensemble mean +/- std")
    else:
        ax.errorbar(ns, means, yerr=stds, fmt="o", color="C1", capsize=4,
                    label="ensemble mean +/- std")
    positive = ys[ys > 0]
    log_ok = bool(len(positive) == len(ys) and means.min() > 0)
    if log_ok:
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(f"sup-time error, {kind}")
    ax.set_title("convergence of the particle field")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, job.output)
    return {"kind": job.kind, "n_count": len(ns), "drew_trend": drew_trend,
            "log_axes": log_ok, "norm": kind}


def _render_error_vs_time(job: PlotJob) -> dict:
    table = read_sweep_csv(job.inputs[0])
    kind = _pick_norm(table, job.norm_kind)
    ns = sorted({n for n, _, k, _, _ in table.samples if k == kind})
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for m in ns:
        series = np.array([per for n, _, k, _, per in table.samples
                           if k == kind and n == m])
        ax.plot(table.times, series.mean(axis=0), "o-", label=f"n={m}")
    ax.set_xlabel("time")
    ax.set_ylabel(f"error, {kind}")
    ax.set_title("error against the reference over time")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, job.output)
    return {"kind": job.kind, "n_count": len(ns), "norm": kind}


def _render_heatmap(job: PlotJob) -> dict:
    t, values = read_snapshot(job.inputs[0])
    peak = float(np.abs(values).max()) or 1e-12
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    im = ax.imshow(values.T, origin="lower", extent=(0, 1, 0, 1),
                   cmap="RdBu_r", vmin=-peak, vmax=peak)
    fig.colorbar(im, ax=ax, label="vorticity")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"field at t={t:g}")
    _save(fig, job.output)
    return {"kind": job.kind, "time": t, "vmax": peak, "vmin": -peak}


def render(job: PlotJob) -> dict:
    """Render one figure; returns a small summary of what was drawn."""
    job.validate()
    if job.kind == "convergence_loglog":
        return _render_convergence(job)
    if job.kind == "error_vs_time":
        return _render_error_vs_time(job)
    return _render_heatmap(job)
