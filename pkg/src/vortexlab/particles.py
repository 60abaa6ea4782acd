"""Generation grid, signed particle populations, and reflected dynamics.

Particles are created on a space-time grid of mesh 1/n: interior lattice
points carry cell averages of the initial vorticity and activate at time 0;
boundary points carry time-by-arc cell averages of the boundary flux and
activate at the odd half-steps (2h-1)/(2n).  Data are split into positive
and negative parts; each grid entry feeds one particle per sign population
and the two populations never exchange weight.

Dynamics: at every step the signed smoothed field of all active particles
is turned into a capped velocity (one field pipeline shared by both
populations), then each particle takes an Euler-Maruyama step with its own
Gaussian increment and is folded back into the domain.  Noise comes from
counter-based streams keyed by (seed, population, step index) and consumed
in fixed particle order, so results are bit-reproducible under any
scheduling.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import biot_savart, heat
from .errors import ConfigError
from .fields import Grid, ScalarField
from .geometry import DomainSpec, boundary_map, reflect

_GL4_NODES, _GL4_WEIGHTS = np.polynomial.legendre.leggauss(4)


# ---------------------------------------------------------------------------
# Generation grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridEntry:
    birth_time: Fraction          # 0 for interior, (2h-1)/(2n) for boundary
    birth_point: tuple[float, float]
    weight_plus: float
    weight_minus: float


@dataclass
class GenerationGrid:
    n: int
    entries: list[GridEntry]
    interior_count: int

    @property
    def boundary_count(self) -> int:
        return len(self.entries) - self.interior_count

    def birth_times(self) -> np.ndarray:
        return np.array([float(e.birth_time) for e in self.entries])

    def birth_points(self) -> np.ndarray:
        return np.array([e.birth_point for e in self.entries])

    def weights(self, sign: int) -> np.ndarray:
        w = np.array(
            [e.weight_plus if sign > 0 else e.weight_minus for e in self.entries]
        )
        w.setflags(write=False)
        return w


def _cell_quadrature(fn, cx, cy, half, domain: DomainSpec) -> tuple[float, float]:
    """Split-sign 4x4 Gauss-Legendre integral of fn over a square cell.

    For the disk the cell is clipped by zeroing quadrature nodes outside
    the closure.
    """
    qx = cx + half * _GL4_NODES
    qy = cy + half * _GL4_NODES
    xx, yy = np.meshgrid(qx, qy, indexing="ij")
    w2 = np.outer(_GL4_WEIGHTS, _GL4_WEIGHTS) * half * half
    vals = np.asarray(fn(xx, yy), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ConfigError("initial vorticity evaluated to a non-finite value")
    if not domain.is_square:
        vals = vals * domain.contains(np.stack([xx.ravel(), yy.ravel()], axis=1)).reshape(
            vals.shape
        )
    plus = float(np.sum(np.maximum(vals, 0.0) * w2))
    minus = float(np.sum(np.maximum(-vals, 0.0) * w2))
    return plus, minus


def _boundary_cell_quadrature(gfn, t0, s0, half_t, half_s, arclen) -> tuple[float, float]:
    qt = t0 + half_t * _GL4_NODES
    qs = np.mod(s0 + half_s * _GL4_NODES, 1.0)
    tt, ss = np.meshgrid(qt, qs, indexing="ij")
    w2 = np.outer(_GL4_WEIGHTS, _GL4_WEIGHTS) * half_t * half_s * arclen
    vals = np.asarray(gfn(tt, ss), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ConfigError("boundary flux evaluated to a non-finite value")
    plus = float(np.sum(np.maximum(vals, 0.0) * w2))
    minus = float(np.sum(np.maximum(-vals, 0.0) * w2))
    return plus, minus


def _nudged_boundary_point(domain: DomainSpec, s: float) -> tuple[float, float]:
    """Birth position gamma(s), pushed 1e-9 along the boundary off exact corners."""
    bp = boundary_map(domain, s)
    if domain.is_square:
        x, y = bp.position
        tol = 1e-12
        near = lambda v: abs(v) <= tol or abs(1.0 - v) <= tol
        if near(x) and near(y):
            bp = boundary_map(domain, (s + 1e-9 / bp.arclength) % 1.0)
    return bp.position


def build_generation_grid(
    n: int, omega0, g, domain: DomainSpec | None = None, flux_scale: float = 1.0
) -> GenerationGrid:
    """Lay out the space-time birth grid and integrate the data over its cells.

    ``omega0(x, y)`` and ``g(t, s)`` must be vectorized callables; ``s`` is
    the boundary parameter in [0, 1).  Entries are ordered interior first
    (lexicographic), then boundary by (time, arc index).

    ``flux_scale`` multiplies the boundary cell integrals.  Runs pass the
    viscosity here: with ``g`` the Neumann datum, the wall creates vorticity
    at rate nu*g, which is what makes the particle mass ledger agree with
    the reference equation's boundary term.
    """
    if n < 2:
        raise ConfigError(f"grid parameter n must be at least 2: got {n}")
    domain = domain or DomainSpec()
    half = 1.0 / (2 * n)
    entries: list[GridEntry] = []
    if domain.is_square:
        lattice = [(a / n, b / n) for a in range(1, n) for b in range(1, n)]
    else:
        r = domain.radius
        span = int(np.ceil(n * r))
        lattice = [
            (a / n, b / n)
            for a in range(-span, span + 1)
            for b in range(-span, span + 1)
            if np.hypot(a / n, b / n) < r
        ]
    for cx, cy in lattice:
        wp, wm = _cell_quadrature(omega0, cx, cy, half, domain)
        entries.append(GridEntry(Fraction(0), (cx, cy), wp, wm))
    interior_count = len(entries)
    arclen = domain.perimeter
    for ht in range(1, n + 1):
        t = Fraction(2 * ht - 1, 2 * n)
        for hs in range(1, n + 1):
            s0 = hs / n
            pos = _nudged_boundary_point(domain, s0 % 1.0)
            wp, wm = _boundary_cell_quadrature(g, float(t), s0, half, half, arclen)
            entries.append(GridEntry(t, pos, flux_scale * wp, flux_scale * wm))
    return GenerationGrid(n=n, entries=entries, interior_count=interior_count)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _next_pow2(v: int) -> int:
    g = 1
    while g < v:
        g *= 2
    return g


DEFAULT_OUTPUT_TIMES = tuple(np.round(np.arange(0.0, 1.01, 0.1), 10))


@dataclass
class SimConfig:
    """One particle run: scaling, physics, data, and output policy."""

    n: int
    nu: float
    m: float
    omega0: object                      # callable (x, y)
    g: object                           # callable (t, s)
    c_epsilon: float = 0.5
    k_sub: int = 4
    grid_g: int | None = None
    seed: int = 0
    output_times: tuple = DEFAULT_OUTPUT_TIMES
    deposition: str = "nearest"
    snapshot_mode: str = "split"        # "split": smooth each sign; "signed": one pass
    domain: DomainSpec = field(default_factory=DomainSpec)
    tail_tol: float = 1e-12

    @property
    def epsilon(self) -> float:
        return self.c_epsilon * self.n ** (-0.5)

    @property
    def dt(self) -> Fraction:
        return Fraction(1, 2 * self.n * self.k_sub)

    @property
    def total_steps(self) -> int:
        return 2 * self.n * self.k_sub

    @property
    def g_resolved(self) -> int:
        return self.grid_g if self.grid_g else _next_pow2(max(128, 8 * self.n))

    def kernel_params(self) -> heat.KernelParams:
        return heat.KernelParams(nu=self.nu, tail_tol=self.tail_tol)

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be at least 2: got {self.n}")
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive: got {self.nu}")
        if self.m < 0:
            raise ConfigError(f"cutoff bound must be nonnegative: got {self.m}")
        if self.k_sub < 1:
            raise ConfigError(f"k_sub must be a positive integer: got {self.k_sub}")
        if not self.c_epsilon > 0:
            raise ConfigError(f"c_epsilon must be positive: got {self.c_epsilon}")
        g = self.g_resolved
        if g & (g - 1):
            raise ConfigError(f"grid size must be a power of two: got {g}")
        # birth times must land exactly on step boundaries
        if (Fraction(1, 2 * self.n) / self.dt).denominator != 1:
            raise ConfigError("time step does not divide the birth interval")
        h = 1.0 / (g - 1)
        if h > self.epsilon / 4.0:
            raise ConfigError(
                f"grid too coarse for the smoothing scale: h={h:.4g} > eps/4={self.epsilon / 4:.4g}"
            )
        dtf = float(self.dt)
        if self.m * dtf + 6.0 * np.sqrt(2.0 * self.nu * dtf) > 1.0:
            raise ConfigError(
                "time step too large for single-fold reflection "
                f"(m*dt + 6*sqrt(2 nu dt) = {self.m * dtf + 6 * np.sqrt(2 * self.nu * dtf):.3g} > 1)"
            )
        for t in self.output_times:
            if not 0.0 <= t <= 1.0:
                raise ConfigError(f"output times must lie in [0,1]: got {t}")
        if self.deposition not in ("nearest", "bilinear"):
            raise ConfigError(f"unknown deposition mode {self.deposition!r}")
        if self.snapshot_mode not in ("split", "signed"):
            raise ConfigError(f"unknown snapshot mode {self.snapshot_mode!r}")

    def snapshot_steps(self) -> list[tuple[int, float]]:
        """Output times snapped to the nearest realized step, deduplicated."""
        seen = {}
        for t in self.output_times:
            k = int(round(float(t) * self.total_steps))
            seen.setdefault(k, float(Fraction(k, self.total_steps)))
        return sorted(seen.items())


# ---------------------------------------------------------------------------
# State and stepping
# ---------------------------------------------------------------------------

SIGNS = (1, -1)


@dataclass
class SimState:
    config: SimConfig
    grid: Grid
    gen: GenerationGrid
    step_index: int
    birth_steps: np.ndarray             # per entry, in units of dt
    birth_points: np.ndarray
    weights: dict                       # sign -> immutable (N,) array
    positions: dict                     # sign -> (N, 2)
    reflection_total: dict              # sign -> (N,)

    @property
    def time(self) -> Fraction:
        return self.step_index * self.config.dt

    def active(self) -> np.ndarray:
        return self.birth_steps <= self.step_index

    def active_weight_sum(self) -> float:
        a = self.active()
        return float(np.sum(self.weights[1][a]) - np.sum(self.weights[-1][a]))


def init_state(config: SimConfig, gen: GenerationGrid | None = None) -> SimState:
    config.validate()
    gen = gen or build_generation_grid(
        config.n, config.omega0, config.g, config.domain, flux_scale=config.nu
    )
    birth_steps = np.array(
        [int(e.birth_time * 2 * config.n) * config.k_sub for e in gen.entries]
    )
    pts = gen.birth_points()
    return SimState(
        config=config,
        grid=Grid(config.domain, config.g_resolved),
        gen=gen,
        step_index=0,
        birth_steps=birth_steps,
        birth_points=pts,
        weights={s: gen.weights(s) for s in SIGNS},
        positions={s: pts.copy() for s in SIGNS},
        reflection_total={s: np.zeros(len(gen.entries)) for s in SIGNS},
    )


def active_set(state: SimState, t: float) -> np.ndarray:
    """Indices of particles generated up to time t (birth order, then grid order)."""
    if not -1e-12 <= t <= 1.0 + 1e-12:
        raise ConfigError(f"query time must lie in [0,1]: got {t}")
    times = state.birth_steps * float(state.config.dt)
    return np.flatnonzero(times <= t + 1e-12)


def _noise(seed: int, pop_index: int, step_index: int, count: int) -> np.ndarray:
    bits = np.random.Philox(
        key=np.array([np.uint64(seed), np.uint64(pop_index)], dtype=np.uint64),
        counter=np.array([0, 0, 0, np.uint64(step_index)], dtype=np.uint64),
    )
    return np.random.Generator(bits).standard_normal((count, 2))


def step(state: SimState, drifts: dict) -> None:
    """Advance every active particle by one time step (in place).

    ``drifts`` maps each sign to an (N, 2) array of capped velocities; rows
    of inactive particles are ignored.
    """
    cfg = state.config
    dtf = float(cfg.dt)
    active = state.active()
    for pop_index, sign in enumerate(SIGNS):
        noise = _noise(cfg.seed, pop_index, state.step_index, len(state.birth_steps))
        pos = state.positions[sign]
        candidate = (
            pos[active]
            + drifts[sign][active] * dtf
            + np.sqrt(2.0 * cfg.nu * dtf) * noise[active]
        )
        newpos, disp = reflect(cfg.domain, candidate)
        pos[active] = newpos
        state.reflection_total[sign][active] += np.hypot(disp[:, 0], disp[:, 1])
    state.step_index += 1


def signed_active_cloud(state: SimState):
    """Positions and signed weights of all active particles, fixed order (+ then -)."""
    a = state.active()
    positions = np.vstack([state.positions[1][a], state.positions[-1][a]])
    weights = np.concatenate([state.weights[1][a], -state.weights[-1][a]])
    return positions, weights, a


def compute_drifts(state: SimState):
    """Capped drift for both populations from one shared signed field pipeline."""
    cfg = state.config
    positions, weights, a = signed_active_cloud(state)
    vel = biot_savart.drift_field(
        positions, weights, cfg.epsilon, state.grid, cfg.kernel_params(), cfg.deposition
    )
    drifts = {}
    for sign in SIGNS:
        d = np.zeros_like(state.positions[sign])
        if a.any():
            d[a] = biot_savart.cutoff(vel.at(state.positions[sign][a]), cfg.m)
        drifts[sign] = d
    return drifts, vel


def snapshot_field(state: SimState) -> ScalarField:
    """Smoothed signed field at the current time, per the configured bookkeeping."""
    cfg = state.config
    params = cfg.kernel_params()
    a = state.active()
    if cfg.snapshot_mode == "signed":
        positions, weights, _ = signed_active_cloud(state)
        return heat.smooth_empirical(
            positions, weights, cfg.epsilon, state.grid, params, cfg.deposition
        )
    plus = heat.smooth_empirical(
        state.positions[1][a], state.weights[1][a], cfg.epsilon, state.grid, params,
        cfg.deposition,
    )
    minus = heat.smooth_empirical(
        state.positions[-1][a], state.weights[-1][a], cfg.epsilon, state.grid, params,
        cfg.deposition,
    )
    return plus - minus


@dataclass
class RunRecord:
    """Per-run diagnostics; error columns are appended by the sweep harness."""

    n: int
    seed: int
    mass_check: float = 0.0             # worst |state ledger - grid cumulative sum|
    max_u: float = 0.0                  # largest uncapped node speed seen
    max_drift: float = 0.0              # largest capped drift magnitude applied
    wallclock: float = 0.0
    realized_times: tuple = ()
    particle_dumps: list = field(default_factory=list)


def run(config: SimConfig, gen: GenerationGrid | None = None, dump_particles: bool = False):
    """Integrate from t=0 to 1 and return (snapshots, record).

    Snapshots is a list of (time, ScalarField) at the configured output
    times (snapped to step boundaries); the record carries the mass ledger
    and velocity diagnostics.
    """
    t0 = _time.perf_counter()
    state = init_state(config, gen)
    snap_steps = dict(config.snapshot_steps())
    record = RunRecord(n=config.n, seed=config.seed)
    snapshots = []

    # cumulative grid-side ledger, accumulated in entry order
    order = np.argsort(state.birth_steps, kind="stable")

    def ledger_at(k: int) -> float:
        sel = order[state.birth_steps[order] <= k]
        return float(np.sum(state.weights[1][sel]) - np.sum(state.weights[-1][sel]))

    for k in range(config.total_steps + 1):
        # births with t_i == k dt activated implicitly by the step-index compare
        record.mass_check = max(
            record.mass_check, abs(state.active_weight_sum() - ledger_at(k))
        )
        if k in snap_steps:
            snapshots.append((snap_steps[k], snapshot_field(state)))
            if dump_particles:
                record.particle_dumps.append((snap_steps[k], particle_rows(state)))
        if k == config.total_steps:
            break
        drifts, vel = compute_drifts(state)
        record.max_u = max(record.max_u, vel.max_speed())
        for sign in SIGNS:
            a = state.active()
            if a.any():
                d = drifts[sign][a]
                record.max_drift = max(
                    record.max_drift, float(np.hypot(d[:, 0], d[:, 1]).max())
                )
        step(state, drifts)

    record.wallclock = _time.perf_counter() - t0
    record.realized_times = tuple(t for t, _ in snapshots)
    return snapshots, record


def particle_rows(state: SimState):
    """Flat per-particle dump rows: (index, sign, t_i, zeta, omega_i, x, y, |k_i|)."""
    rows = []
    dtf = float(state.config.dt)
    for sign in SIGNS:
        for i in range(len(state.birth_steps)):
            rows.append(
                (
                    i,
                    sign,
                    state.birth_steps[i] * dtf,
                    state.birth_points[i, 0],
                    state.birth_points[i, 1],
                    state.weights[sign][i],
                    state.positions[sign][i, 0],
                    state.positions[sign][i, 1],
                    state.reflection_total[sign][i],
                )
            )
    return rows
