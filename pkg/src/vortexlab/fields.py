"""Node-lattice scalar fields and the fast transforms behind every operator.

Fields live on a G x G lattice over the closure of the domain.  On the unit
square the lattice includes the boundary, h = 1/(G-1), and two bases are in
play:

* cosine basis cos(j pi x) cos(k pi y)  (zero normal derivative), reached by
  the type-I DCT of the node values; coefficients are exact interpolation
  coefficients, so values <-> spectrum round-trips are lossless;
* sine basis sin(j pi x) sin(k pi y)  (zero trace), reached by the type-I
  DST of the interior values, used by the Dirichlet Poisson solve.

Integrals use the trapezoid rule, which on this lattice is exactly the
coefficient of the constant mode; spectral multipliers that fix that mode
therefore conserve mass to the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .geometry import DomainSpec, GeometryError


@dataclass(frozen=True)
class Grid:
    """A G x G node lattice over the closure of the domain."""

    domain: DomainSpec
    g: int

    def __post_init__(self):
        if self.g < 4:
            raise GeometryError(f"grid size must be at least 4: got {self.g}")

    @property
    def h(self) -> float:
        side = 1.0 if self.domain.is_square else 2.0 * self.domain.radius
        return side / (self.g - 1)

    @property
    def axis(self) -> np.ndarray:
        if self.domain.is_square:
            return np.linspace(0.0, 1.0, self.g)
        r = self.domain.radius
        return np.linspace(-r, r, self.g)

    def meshes(self):
        x = self.axis
        return np.meshgrid(x, x, indexing="ij")

    def node_weights(self) -> np.ndarray:
        """Per-node quadrature weights (outer product of 1-D trapezoid weights)."""
        if self.domain.is_square:
            w = np.ones(self.g)
            w[0] = w[-1] = 0.5
            return np.outer(w, w)
        xx, yy = self.meshes()
        return self.domain.contains(
            np.stack([xx.ravel(), yy.ravel()], axis=1)
        ).reshape(self.g, self.g).astype(float)

    def inside_mask(self) -> np.ndarray:
        xx, yy = self.meshes()
        return self.domain.contains(np.stack([xx.ravel(), yy.ravel()], axis=1)).reshape(
            self.g, self.g
        )


# ---------------------------------------------------------------------------
# 1-D/2-D transform helpers (type-I DCT/DST, interpolation-coefficient scaling)
# ---------------------------------------------------------------------------

def _end_scale(g: int) -> np.ndarray:
    s = np.ones(g)
    s[0] = s[-1] = 2.0
    return s


def cos_coeffs(values: np.ndarray) -> np.ndarray:
    """Coefficients a with values[i,k] = sum_jl a[j,l] cos(j pi x_i) cos(l pi x_k)."""
    g = values.shape[0]
    L = g - 1
    s = _end_scale(g)
    X = scipy.fft.dctn(values, type=1)
    return X / (L * L * np.outer(s, s))


def cos_values(a: np.ndarray) -> np.ndarray:
    """Inverse of :func:`cos_coeffs`."""
    g = a.shape[0]
    s = _end_scale(g)
    return scipy.fft.dctn(a * np.outer(s, s), type=1) / 4.0


def sin_coeffs(interior: np.ndarray) -> np.ndarray:
    """Sine-interpolation coefficients of interior node values ((G-2)^2 array)."""
    L = interior.shape[0] + 1
    return scipy.fft.dstn(interior, type=1) / (L * L)


def sin_values(b: np.ndarray) -> np.ndarray:
    """Inverse of :func:`sin_coeffs` (returns interior values)."""
    return scipy.fft.dstn(b, type=1) / 4.0


def synth_mixed(coeffs: np.ndarray, sin_axis: int) -> np.ndarray:
    """Evaluate a sin (x) cos tensor series on the full lattice.

    ``coeffs`` has shape (G-2, G) for ``sin_axis=0`` (sine modes j=1..G-2
    along axis 0, cosine modes 0..G-1 along axis 1), and transposed shape
    for ``sin_axis=1``.  Rows on the sine axis boundary are zero.
    """
    if sin_axis == 1:
        return synth_mixed(coeffs.T, 0).T
    g = coeffs.shape[1]
    s = _end_scale(g)
    tmp = scipy.fft.dct(coeffs * s[None, :], type=1, axis=1) / 2.0
    interior = scipy.fft.dst(tmp, type=1, axis=0) / 2.0
    out = np.zeros((g, g))
    out[1:-1, :] = interior
    return out


def analyze_mixed(values: np.ndarray, sin_axis: int) -> np.ndarray:
    """Inverse of :func:`synth_mixed`: sin (x) cos coefficients of node values."""
    if sin_axis == 1:
        return analyze_mixed(values.T, 0).T
    g = values.shape[0]
    L = g - 1
    s = _end_scale(g)
    tmp = scipy.fft.dst(values[1:-1, :], type=1, axis=0) / L
    return scipy.fft.dct(tmp, type=1, axis=1) / (L * s[None, :])


def gradient_values(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral gradient of a cosine-interpolated field, sampled on the lattice."""
    g = values.shape[0]
    a = cos_coeffs(values)
    j = np.arange(1, g - 1)
    cx = -(j * np.pi)[:, None] * a[1:-1, :]
    cy = -(j * np.pi)[None, :] * a[:, 1:-1]
    fx = synth_mixed(cx, sin_axis=0)
    fy = synth_mixed(cy.T, sin_axis=0).T
    return fx, fy


def parseval_weights(g: int) -> np.ndarray:
    """Diagonal weights turning coefficient sums into the trapezoid L2 norm."""
    d = np.full(g, 0.5)
    d[0] = d[-1] = 1.0
    return np.outer(d, d)


def laplacian_symbol(g: int, nu: float = 1.0) -> np.ndarray:
    """Eigenvalues nu pi^2 (j^2 + k^2) of the cosine modes."""
    j = np.arange(g, dtype=float)
    return nu * np.pi**2 * (j[:, None] ** 2 + j[None, :] ** 2)


def bilinear(grid: Grid, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of node values at (N, 2) points in the closure."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    origin = 0.0 if grid.domain.is_square else -grid.domain.radius
    f = (p - origin) / grid.h
    i0 = np.clip(np.floor(f).astype(int), 0, grid.g - 2)
    t = f - i0
    ix, iy = i0[:, 0], i0[:, 1]
    tx, ty = t[:, 0], t[:, 1]
    v = (
        values[ix, iy] * (1 - tx) * (1 - ty)
        + values[ix + 1, iy] * tx * (1 - ty)
        + values[ix, iy + 1] * (1 - tx) * ty
        + values[ix + 1, iy + 1] * tx * ty
    )
    return v if np.ndim(points) > 1 else float(v[0])


class ScalarField:
    """Grid-sampled scalar function with a lazily attached cosine spectrum."""

    def __init__(self, grid: Grid, values: np.ndarray, spectrum: np.ndarray | None = None):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.g, grid.g):
            raise ValueError(f"values shape {values.shape} does not match grid {grid.g}")
        self.grid = grid
        self.values = values
        self._spectrum = spectrum

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.g, grid.g)))

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "ScalarField":
        return cls(grid, cos_values(spectrum), spectrum=spectrum.copy())

    @classmethod
    def sample(cls, grid: Grid, fn) -> "ScalarField":
        xx, yy = grid.meshes()
        return cls(grid, np.asarray(fn(xx, yy), dtype=float))

    @property
    def spectrum(self) -> np.ndarray:
        if not self.grid.domain.is_square:
            raise GeometryError("cosine spectrum is only defined on the unit square")
        if self._spectrum is None:
            self._spectrum = cos_coeffs(self.values)
        return self._spectrum

    def mass(self) -> float:
        return float(np.sum(self.values * self.grid.node_weights()) * self.grid.h**2)

    def copy(self) -> "ScalarField":
        return ScalarField(
            self.grid,
            self.values.copy(),
            None if self._spectrum is None else self._spectrum.copy(),
        )

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * c)

    __rmul__ = __mul__
