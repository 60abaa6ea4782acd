"""Velocity from vorticity through the zero-trace stream function.

On the unit square the chain is fully spectral: sine-expand the vorticity,
divide by pi^2 (j^2 + k^2) to get the stream function, and differentiate the
series term by term, so u = (d_y psi, -d_x psi) is divergence-free and
impermeable to machine precision.  The regularized pair kernel used for
cross-validation integrates rows of the singular kernel (recovered from
velocity fields of node deltas) against the smoothing kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.sparse
import scipy.sparse.linalg

from . import heat
from .fields import (
    Grid,
    ScalarField,
    analyze_mixed,
    bilinear,
    cos_values,
    sin_coeffs,
    sin_values,
    synth_mixed,
)


@dataclass
class VelocityField:
    """Node-sampled velocity; components stacked on the last axis."""

    grid: Grid
    u: np.ndarray  # (G, G, 2)

    def at(self, points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(points)
        out = np.stack(
            [bilinear(self.grid, self.u[..., 0], p), bilinear(self.grid, self.u[..., 1], p)],
            axis=-1,
        )
        return out if np.ndim(points) > 1 else out[0]

    def max_speed(self) -> float:
        return float(np.sqrt((self.u**2).sum(axis=-1)).max())

    def normal_trace_max(self) -> float:
        """Largest |u . n| over the boundary nodes (square only)."""
        u1, u2 = self.u[..., 0], self.u[..., 1]
        return float(
            max(
                np.abs(u1[0, :]).max(),
                np.abs(u1[-1, :]).max(),
                np.abs(u2[:, 0]).max(),
                np.abs(u2[:, -1]).max(),
            )
        )


def stream_function(omega: ScalarField) -> ScalarField:
    """Solve -Lap(psi) = omega with psi = 0 on the boundary."""
    grid = omega.grid
    if grid.domain.is_square:
        b = sin_coeffs(omega.values[1:-1, 1:-1])
        j = np.arange(1, grid.g - 1, dtype=float)
        lam = np.pi**2 * (j[:, None] ** 2 + j[None, :] ** 2)
        psi_hat = b / lam
        psi = np.zeros_like(omega.values)
        psi[1:-1, 1:-1] = sin_values(psi_hat)
        return ScalarField(grid, psi)
    return _disk_stream(omega)


def velocity(omega: ScalarField) -> VelocityField:
    """Biot-Savart velocity u = (d_y psi, -d_x psi) of a vorticity field."""
    grid = omega.grid
    if not grid.domain.is_square:
        return _disk_velocity(omega)
    g = grid.g
    b = sin_coeffs(omega.values[1:-1, 1:-1])
    j = np.arange(1, g - 1, dtype=float)
    lam = np.pi**2 * (j[:, None] ** 2 + j[None, :] ** 2)
    psi_hat = b / lam
    c1 = np.zeros((g - 2, g))
    c1[:, 1:-1] = psi_hat * (j * np.pi)[None, :]
    u1 = synth_mixed(c1, sin_axis=0)
    c2 = np.zeros((g, g - 2))
    c2[1:-1, :] = -psi_hat * (j * np.pi)[:, None]
    u2 = synth_mixed(c2, sin_axis=1)
    return VelocityField(grid, np.stack([u1, u2], axis=-1))


def divergence(vel: VelocityField) -> np.ndarray:
    """Spectral divergence of a node-sampled velocity field (square only)."""
    g = vel.grid.g
    j = np.arange(1, g - 1, dtype=float)
    c1 = analyze_mixed(vel.u[..., 0], sin_axis=0)
    a1 = np.zeros((g, g))
    a1[1:-1, :] = (j * np.pi)[:, None] * c1
    c2 = analyze_mixed(vel.u[..., 1], sin_axis=1)
    a2 = np.zeros((g, g))
    a2[:, 1:-1] = (j * np.pi)[None, :] * c2
    return cos_values(a1 + a2)


def cutoff(v: np.ndarray, M: float) -> np.ndarray:
    """Radial speed cap: v unchanged below speed M, rescaled onto the M-sphere above."""
    if M < 0:
        raise ValueError(f"speed bound must be nonnegative: got {M}")
    v = np.asarray(v, dtype=float)
    speed = np.sqrt((v**2).sum(axis=-1, keepdims=True))
    scale = np.where(speed > M, M / np.where(speed > 0, speed, 1.0), 1.0)
    return v * scale


# ---------------------------------------------------------------------------
# Regularized pair kernel (validation route)
# ---------------------------------------------------------------------------

_ROW_CACHE: dict = {}


def _point_key(p) -> tuple:
    return (round(float(p[0]), 14), round(float(p[1]), 14))


def assemble_pair_rows(points, quad_g: int) -> None:
    """Precompute kernel rows K(x, .) on the quadrature lattice for many x at once.

    The row entry at lattice node z is the velocity field of a unit point
    mass at z, evaluated at x.  Deltas at boundary nodes produce zero rows,
    consistent with the Green function vanishing there.  Indicator solves
    are batched one lattice column at a time (stacked transforms); results
    are cached per (x, quad_g).
    """
    grid = Grid(_UNIT_SQUARE, quad_g)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    todo = [p for p in pts if (_point_key(p), quad_g) not in _ROW_CACHE]
    if not todo:
        return
    xs = np.array(todo)
    g = quad_g
    L = g - 1
    j = np.arange(1, g - 1, dtype=float)
    lam = np.pi**2 * (j[:, None] ** 2 + j[None, :] ** 2)
    nodes = np.arange(g) / L
    sin_nodes = np.sin(np.pi * np.outer(j, nodes))  # (modes, nodes)
    cos_nodes = np.cos(np.pi * np.outer(j, nodes))
    f = xs / grid.h
    i0 = np.clip(np.floor(f).astype(int), 0, g - 2)
    tfr = f - i0
    for i, p in enumerate(xs):
        ix, iy = i0[i]
        tx, ty = tfr[i]
        # tensor-product interpolation weights of each separable mode at x
        sx = (1 - tx) * sin_nodes[:, ix] + tx * sin_nodes[:, ix + 1]
        cx = (1 - tx) * cos_nodes[:, ix] + tx * cos_nodes[:, ix + 1]
        sy = (1 - ty) * sin_nodes[:, iy] + ty * sin_nodes[:, iy + 1]
        cy = (1 - ty) * cos_nodes[:, iy] + ty * cos_nodes[:, iy + 1]
        b1 = (j * np.pi)[None, :] / lam * np.outer(sx, cy)   # d/dy psi at x, per mode
        b2 = -(j * np.pi)[:, None] / lam * np.outer(cx, sy)  # -d/dx psi at x, per mode
        row = np.zeros((g, g, 2))
        row[1:-1, 1:-1, 0] = scipy.fft.dstn(b1, type=1)
        row[1:-1, 1:-1, 1] = scipy.fft.dstn(b2, type=1)
        _ROW_CACHE[(_point_key(p), quad_g)] = row


def pair_kernel_regularized(
    x, y, epsilon: float, quad_g: int, params: heat.KernelParams
) -> np.ndarray:
    """K smoothed in its second argument: quadrature of K(x, .) against p_eps(., y).

    Deliberately independent of the deposition/semigroup pipeline: the kernel
    rows come from per-node velocity solves and the smoothing factor from the
    closed-form kernel, so this is the slow cross-check route.
    """
    if not epsilon > 0:
        raise ValueError(f"smoothing time must be positive: got {epsilon}")
    key = (_point_key(x), quad_g)
    if key not in _ROW_CACHE:
        assemble_pair_rows([x], quad_g)
    row = _ROW_CACHE[key]
    grid = Grid(_UNIT_SQUARE, quad_g)
    ax = grid.axis
    y = np.asarray(y, dtype=float)
    pz = np.multiply.outer(
        heat.heat_kernel_1d(epsilon, ax, y[0], params),
        heat.heat_kernel_1d(epsilon, ax, y[1], params),
    )
    wq = grid.node_weights() * grid.h**2
    return np.einsum("ijm,ij,ij->m", row, pz, wq)


def drift_field(
    positions: np.ndarray,
    weights: np.ndarray,
    epsilon: float,
    grid: Grid,
    params: heat.KernelParams,
    deposition: str = "nearest",
) -> VelocityField:
    """Velocity of the kernel-smoothed signed empirical measure."""
    omega = heat.smooth_empirical(positions, weights, epsilon, grid, params, deposition)
    return velocity(omega)


def mean_field_drift(
    positions: np.ndarray,
    weights: np.ndarray,
    epsilon: float,
    grid: Grid,
    M: float,
    params: heat.KernelParams,
    deposition: str = "nearest",
    at: np.ndarray | None = None,
) -> np.ndarray:
    """Capped interaction drift at particle positions via the grid route.

    Exchanging the sum over particles with the smoothing integral turns the
    pairwise interaction sum into one field pipeline: smooth the signed
    empirical measure, solve for the velocity, interpolate, cap.
    """
    vel = drift_field(positions, weights, epsilon, grid, params, deposition)
    pts = positions if at is None else at
    return cutoff(vel.at(pts), M)


# ---------------------------------------------------------------------------
# Disk fallbacks (iterative solve + centered differences; sanity tier)
# ---------------------------------------------------------------------------

from .geometry import DomainSpec  # noqa: E402  (kept local to the fallbacks)

_UNIT_SQUARE = DomainSpec("unit_square")


def _disk_stream(omega: ScalarField) -> ScalarField:
    grid = omega.grid
    mask = grid.inside_mask()
    g = grid.g
    idx = -np.ones((g, g), dtype=int)
    inner = mask.copy()
    inner[0, :] = inner[-1, :] = inner[:, 0] = inner[:, -1] = False
    idx[inner] = np.arange(inner.sum())
    n = int(inner.sum())
    h2 = grid.h**2
    rows, cols, vals = [], [], []
    src = np.argwhere(inner)
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nbr = src + (dx, dy)
        ok = inner[nbr[:, 0], nbr[:, 1]]
        rows.extend(idx[src[ok, 0], src[ok, 1]])
        cols.extend(idx[nbr[ok, 0], nbr[ok, 1]])
        vals.extend(np.full(ok.sum(), -1.0 / h2))
    rows.extend(range(n))
    cols.extend(range(n))
    vals.extend(np.full(n, 4.0 / h2))
    A = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    rhs = omega.values[inner]
    sol, info = scipy.sparse.linalg.cg(A, rhs, rtol=1e-10, maxiter=10000)
    if info != 0:
        raise RuntimeError(f"disk Poisson solve did not converge (info={info})")
    psi = np.zeros((g, g))
    psi[inner] = sol
    return ScalarField(grid, psi)


def _disk_velocity(omega: ScalarField) -> VelocityField:
    psi = stream_function(omega).values
    h = omega.grid.h
    u = np.zeros((omega.grid.g, omega.grid.g, 2))
    u[:, 1:-1, 0] = (psi[:, 2:] - psi[:, :-2]) / (2 * h)
    u[1:-1, :, 1] = -(psi[2:, :] - psi[:-2, :]) / (2 * h)
    mask = omega.grid.inside_mask()
    u[~mask] = 0.0
    return VelocityField(omega.grid, u)
