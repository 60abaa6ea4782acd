"""Error norms for gridded fields and snapshot trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, laplacian_symbol, parseval_weights

KINDS = ("sup", "lp", "sobolev")


@dataclass(frozen=True)
class NormSpec:
    """One of sup, L^p, or the spectral H^alpha norm built on (I+A)^(alpha/2)."""

    kind: str = "lp"
    p: float = 2.0
    alpha: float = 0.0
    nu: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}; use one of {KINDS}")
        if self.kind == "lp" and not self.p >= 1:
            raise ValueError(f"lp norm needs p >= 1: got {self.p}")

    def label(self) -> str:
        if self.kind == "sup":
            return "sup"
        if self.kind == "lp":
            return f"lp({self.p:g})"
        return f"sobolev({self.alpha:g})"


def norm(f: ScalarField, spec: NormSpec) -> float:
    if spec.kind == "sup":
        return float(np.abs(f.values).max())
    if spec.kind == "lp":
        w = f.grid.node_weights() * f.grid.h**2
        return float(np.sum(w * np.abs(f.values) ** spec.p) ** (1.0 / spec.p))
    mult = (1.0 + laplacian_symbol(f.grid.g, spec.nu)) ** spec.alpha
    return float(np.sqrt(np.sum(parseval_weights(f.grid.g) * mult * f.spectrum**2)))


def trajectory_error(snapshots_a, snapshots_b, spec: NormSpec):
    """Per-output-time norms of the difference and their maximum over time.

    Both arguments are lists of (time, field) with matching times and grids.
    """
    if len(snapshots_a) != len(snapshots_b):
        raise ValueError(
            f"snapshot count mismatch: {len(snapshots_a)} vs {len(snapshots_b)}"
        )
    per_time = []
    for (ta, fa), (tb, fb) in zip(snapshots_a, snapshots_b):
        if abs(ta - tb) > 1e-12:
            raise ValueError(f"output times differ: {ta} vs {tb}")
        if fa.grid.g != fb.grid.g or fa.grid.domain != fb.grid.domain:
            raise ValueError("snapshot grids differ")
        per_time.append(norm(fa - fb, spec))
    return max(per_time), per_time
