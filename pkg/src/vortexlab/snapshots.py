"""Line-oriented persistence: field snapshots, particle dumps, results CSV.

Snapshot files carry one ``# key=value`` header line followed by node-major
rows of values printed with shortest round-trip precision, so reading a file
back reproduces the array bit for bit.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .fields import Grid, ScalarField
from .geometry import DomainSpec

_HEADER_KEYS = ("time", "n", "g", "epsilon", "nu", "m", "seed", "domain")


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(path, time, field: ScalarField, *, n=0, epsilon=0.0, nu=0.0,
                   m=0.0, seed=0) -> None:
    meta = {
        "time": repr(float(time)),
        "n": str(int(n)),
        "g": str(field.grid.g),
        "epsilon": repr(float(epsilon)),
        "nu": repr(float(nu)),
        "m": repr(float(m)),
        "seed": str(int(seed)),
        "domain": field.grid.domain.kind,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("# " + " ".join(f"{k}={meta[k]}" for k in _HEADER_KEYS) + "\n")
        for row in field.values:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_snapshot(path):
    """Returns (meta dict, ScalarField); meta values are parsed numbers."""
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        if not header.startswith("# "):
            raise SnapshotFormatError(f"{path}:1: missing snapshot header")
        meta = {}
        for token in header[2:].split():
            if "=" not in token:
                raise SnapshotFormatError(f"{path}:1: malformed header token {token!r}")
            k, v = token.split("=", 1)
            meta[k] = v
        try:
            g = int(meta["g"])
            domain = DomainSpec(meta.get("domain", "unit_square"))
        except (KeyError, ValueError) as exc:
            raise SnapshotFormatError(f"{path}:1: bad header ({exc})") from None
        values = np.empty((g, g))
        for i in range(g):
            line = f.readline()
            if not line:
                raise SnapshotFormatError(f"{path}:{i + 2}: truncated snapshot")
            row = line.split()
            if len(row) != g:
                raise SnapshotFormatError(
                    f"{path}:{i + 2}: expected {g} values, found {len(row)}"
                )
            values[i] = [float(v) for v in row]
    parsed = {
        "time": float(meta["time"]),
        "n": int(meta["n"]),
        "g": g,
        "epsilon": float(meta["epsilon"]),
        "nu": float(meta["nu"]),
        "m": float(meta["m"]),
        "seed": int(meta["seed"]),
        "domain": meta.get("domain", "unit_square"),
    }
    return parsed, ScalarField(Grid(domain, g), values)


def write_particle_dump(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("# index sign t_i zeta_x zeta_y omega_i x y k_total\n")
        for r in rows:
            f.write(" ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in r) + "\n")


def write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else str(v) for v in row])


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        rows = list(reader)
    if not rows:
        raise SnapshotFormatError(f"{path}:1: empty CSV")
    return rows[0], rows[1:]


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else str(v) for v in row])
    return buf.getvalue().encode("utf-8")
