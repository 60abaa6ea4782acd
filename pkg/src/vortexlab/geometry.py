"""Computational domains: boundary parametrization, inward normals, reflection.

Two domains are supported: the unit square (default, exact tensor-product
transforms) and the disk (smooth boundary, sanity-tier field operators).
The boundary is parametrized by ``s in [0, 1)`` with constant speed per
edge; traversal is counterclockwise, starting at (0, 0) for the square and
at (R, 0) for the disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)

#: Inward normals at the four square corners, fixed by the diagonal convention.
_CORNER_NORMALS = {
    (0.0, 0.0): (1.0 / SQRT2, 1.0 / SQRT2),
    (1.0, 0.0): (-1.0 / SQRT2, 1.0 / SQRT2),
    (1.0, 1.0): (-1.0 / SQRT2, -1.0 / SQRT2),
    (0.0, 1.0): (1.0 / SQRT2, -1.0 / SQRT2),
}


class GeometryError(ValueError):
    """Raised for out-of-contract geometric inputs."""


class FoldEnvelopeError(RuntimeError):
    """Candidate point lies outside the single-fold envelope.

    This signals that one Euler-Maruyama step moved a particle farther than
    one domain width past the boundary, i.e. the time step is too large.
    """


@dataclass(frozen=True)
class DomainSpec:
    """An open, bounded, convex planar domain with a closed-form boundary."""

    kind: str = "unit_square"
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("unit_square", "unit_disk"):
            raise GeometryError(f"unknown domain kind: {self.kind!r}")
        if self.kind == "unit_disk" and not self.radius > 0:
            raise GeometryError("disk radius must be positive")

    @property
    def perimeter(self) -> float:
        if self.kind == "unit_square":
            return 4.0
        return 2.0 * np.pi * self.radius

    @property
    def is_square(self) -> bool:
        return self.kind == "unit_square"

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Membership in the closure of the domain, inflated by ``tol``."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "unit_square":
            inside = np.all((p >= -tol) & (p <= 1.0 + tol), axis=1)
        else:
            inside = np.hypot(p[:, 0], p[:, 1]) <= self.radius + tol
        return inside if np.ndim(points) > 1 else bool(inside[0])

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Unsigned distance to the boundary curve (valid on both sides)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "unit_square":
            inside_d = np.min(
                np.stack([p[:, 0], 1.0 - p[:, 0], p[:, 1], 1.0 - p[:, 1]]), axis=0
            )
            d = np.abs(inside_d)
            # outside the square the face distances go negative; recompute
            out = ~np.all((p >= 0) & (p <= 1), axis=1)
            if np.any(out):
                q = np.clip(p[out], 0.0, 1.0)
                d[out] = np.hypot(*(p[out] - q).T)
        else:
            d = np.abs(self.radius - np.hypot(p[:, 0], p[:, 1]))
        return d if np.ndim(points) > 1 else float(d[0])


@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary location: parameter, position, inward normal, |gamma'(s)|."""

    s: float
    position: tuple[float, float]
    normal: tuple[float, float]
    arclength: float


def boundary_map(domain: DomainSpec, s: float) -> BoundaryPoint:
    """Evaluate the boundary parametrization gamma at parameter ``s``.

    For the square the traversal is counterclockwise starting at (0, 0);
    corners get the diagonal-convention normal.
    """
    if not (0.0 <= s < 1.0):
        raise GeometryError(f"boundary parameter must lie in [0,1): got {s}")
    if domain.kind == "unit_square":
        u = 4.0 * s
        edge = int(u)  # 0..3
        f = u - edge
        if edge == 0:
            pos, nrm = (f, 0.0), (0.0, 1.0)
        elif edge == 1:
            pos, nrm = (1.0, f), (-1.0, 0.0)
        elif edge == 2:
            pos, nrm = (1.0 - f, 1.0), (0.0, -1.0)
        else:
            pos, nrm = (0.0, 1.0 - f), (1.0, 0.0)
        if pos in _CORNER_NORMALS:
            nrm = _CORNER_NORMALS[pos]
        return BoundaryPoint(s=s, position=pos, normal=nrm, arclength=4.0)
    theta = 2.0 * np.pi * s
    c, sn = np.cos(theta), np.sin(theta)
    return BoundaryPoint(
        s=s,
        position=(domain.radius * c, domain.radius * sn),
        normal=(-c, -sn),
        arclength=2.0 * np.pi * domain.radius,
    )


def inward_normal(
    domain: DomainSpec, p: tuple[float, float], tol_boundary: float = 1e-12
) -> np.ndarray:
    """Inward unit normal at a point on (or within ``tol_boundary`` of) the boundary."""
    x, y = float(p[0]), float(p[1])
    if domain.boundary_distance((x, y)) > tol_boundary:
        raise GeometryError(f"point {p} is not on the boundary (tol={tol_boundary})")
    if domain.kind == "unit_square":
        on_faces = [
            abs(x) <= tol_boundary,          # left
            abs(1.0 - x) <= tol_boundary,    # right
            abs(y) <= tol_boundary,          # bottom
            abs(1.0 - y) <= tol_boundary,    # top
        ]
        if sum(on_faces) >= 2:
            cx = 0.0 if on_faces[0] else 1.0
            cy = 0.0 if on_faces[2] else 1.0
            return np.array(_CORNER_NORMALS[(cx, cy)])
        if on_faces[0]:
            return np.array([1.0, 0.0])
        if on_faces[1]:
            return np.array([-1.0, 0.0])
        if on_faces[2]:
            return np.array([0.0, 1.0])
        return np.array([0.0, -1.0])
    r = np.hypot(x, y)
    return np.array([-x / r, -y / r])


def _fold_unit(v: np.ndarray) -> np.ndarray:
    """One coordinate-wise fold of values into [0, 1]."""
    v = np.abs(v)
    return np.where(v > 1.0, 2.0 - v, v)


def reflect(domain: DomainSpec, candidate: np.ndarray):
    """Discrete reflection of post-step candidate positions into the domain closure.

    Square: fold each coordinate (|x|, then 2-x above 1).  Disk: project
    radially, p -> p*(2R-|p|)/|p| for |p| > R.  Returns ``(position,
    displacement)`` with ``displacement = position - candidate``; the
    displacement is the discrete boundary push of the reflected dynamics.

    Accepts a single point or an (N, 2) array.  Raises
    :class:`FoldEnvelopeError` if any candidate needs more than one fold
    per coordinate.
    """
    cand = np.asarray(candidate, dtype=float)
    single = cand.ndim == 1
    c = np.atleast_2d(cand)
    if domain.kind == "unit_square":
        if np.any((c < -1.0) | (c > 2.0)):
            bad = c[np.any((c < -1.0) | (c > 2.0), axis=1)][0]
            raise FoldEnvelopeError(
                f"candidate {tuple(bad)} outside single-fold envelope [-1,2]^2; "
                "reduce the time step"
            )
        pos = _fold_unit(c)
    else:
        r = np.hypot(c[:, 0], c[:, 1])
        if np.any(r > 2.0 * domain.radius):
            raise FoldEnvelopeError(
                f"candidate radius {r.max():.6g} exceeds 2R; reduce the time step"
            )
        scale = np.where(r > domain.radius, (2.0 * domain.radius - r) / np.maximum(r, 1e-300), 1.0)
        pos = c * scale[:, None]
    disp = pos - c
    if single:
        return pos[0], disp[0]
    return pos, disp
