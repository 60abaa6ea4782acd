"""Named property suite behind the ``selftest-kernel`` subcommand.

Each property measures a defect against its pinned tolerance and the runner
prints one line per property.  A fault hook can corrupt the diffusion
multiplier to prove the suite actually bites (the composition identity is
the canary).
"""

from __future__ import annotations

import numpy as np

from . import biot_savart as bs
from .fields import Grid, ScalarField, gradient_values
from .geometry import DomainSpec, reflect
from .heat import KernelParams, apply_semigroup, fractional_multiplier, heat_kernel_1d

SQ = DomainSpec("unit_square")


def _kernel_2d(t, ax, y, params):
    return np.multiply.outer(
        heat_kernel_1d(t, ax, y[0], params), heat_kernel_1d(t, ax, y[1], params)
    )


def _properties(fault=None):
    params = KernelParams(nu=1.0)
    grid = Grid(SQ, 128)
    quad = Grid(SQ, 256)
    wq = quad.node_weights() * quad.h**2
    rng = np.random.default_rng(20240801)

    def p_kernel_mass():
        worst = 0.0
        for t in (1e-3, 1e-2, 1e-1):
            vals = _kernel_2d(t, quad.axis, np.array([0.3, 0.7]), params)
            worst = max(worst, abs(float(np.sum(vals * wq)) - 1.0))
        return worst, 1e-8

    def p_kernel_symmetry():
        worst = 0.0
        for _ in range(100):
            t = 10 ** rng.uniform(-3, -0.5)
            x, y = rng.uniform(0, 1, 2)
            worst = max(
                worst,
                abs(heat_kernel_1d(t, x, y, params) - heat_kernel_1d(t, y, x, params)),
            )
        return worst, 1e-12

    def p_chapman_kolmogorov():
        s = t = 0.005
        x, y = np.array([0.4, 0.55]), np.array([0.7, 0.3])
        ps = _kernel_2d(s, quad.axis, x, params)
        pt = _kernel_2d(t, quad.axis, y, params)
        composed = float(np.sum(ps * pt * wq))
        direct_params = params if fault != "multiplier" else KernelParams(nu=1.005)
        direct = float(
            heat_kernel_1d(s + t, x[0], y[0], direct_params)
            * heat_kernel_1d(s + t, x[1], y[1], direct_params)
        )
        return abs(composed - direct) / abs(direct), 1e-6

    def p_image_series_agreement():
        ts = params.switch_time
        image = KernelParams(nu=1.0, t_switch=10.0)
        eigen = KernelParams(nu=1.0, t_switch=0.0)
        worst = 0.0
        for _ in range(100):
            t = rng.uniform(0.5 * ts, 2.0 * ts)
            x, y = rng.uniform(0, 1, 2)
            worst = max(
                worst, abs(heat_kernel_1d(t, x, y, image) - heat_kernel_1d(t, x, y, eigen))
            )
        return worst, 1e-10

    def p_kernel_envelope():
        worst = 0.0
        for _ in range(200):
            t = 10 ** rng.uniform(-3, -1)
            x, y = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
            p = heat_kernel_1d(t, x[0], y[0], params) * heat_kernel_1d(t, x[1], y[1], params)
            bound = (4.0 / t) * np.exp(-np.sum((x - y) ** 2) / (16.0 * t))
            worst = max(worst, p / bound)
        return worst, 1.0 + 1e-9

    def p_ultracontractivity():
        pts = np.linspace(0, 1, 33)
        worst = 0.0
        for t in np.geomspace(1e-4, 1e-1, 9):
            diag = heat_kernel_1d(t, pts, pts, params)
            worst = max(worst, t * float((np.outer(diag, diag)).max()))
        return worst, 0.35

    def p_semigroup_mass():
        f = ScalarField(grid, rng.uniform(0, 1, (grid.g, grid.g)))
        worst = max(
            abs(apply_semigroup(f, t, params).mass() - f.mass()) for t in (1e-3, 0.05, 0.5)
        )
        return worst, 1e-10

    def p_semigroup_composition():
        f = ScalarField(grid, rng.standard_normal((grid.g, grid.g)))
        a = apply_semigroup(apply_semigroup(f, 0.01, params), 0.03, params)
        b = apply_semigroup(f, 0.04, params)
        return float(np.abs(a.values - b.values).max()), 1e-10

    def p_gradient_estimate():
        xx, yy = grid.meshes()
        f = np.cos(np.pi * xx) * np.cos(2 * np.pi * yy)
        gx = -np.pi * np.sin(np.pi * xx) * np.cos(2 * np.pi * yy)
        gy = -2 * np.pi * np.cos(np.pi * xx) * np.sin(2 * np.pi * yy)
        mod = ScalarField(grid, np.hypot(gx, gy))
        worst = -np.inf
        for t in (1e-3, 1e-2):
            sm = apply_semigroup(ScalarField(grid, f), t, params)
            dx, dy = gradient_values(sm.values)
            rhs = apply_semigroup(mod, t, params).values
            worst = max(worst, float((np.hypot(dx, dy) - rhs).max()))
        return worst, 1e-8

    def p_fractional_group():
        f = ScalarField(grid, rng.standard_normal((grid.g, grid.g)))
        back = fractional_multiplier(fractional_multiplier(f, 1.3, params), -1.3, params)
        return float(np.abs(back.values - f.values).max()), 1e-10

    def p_biot_savart_eigenfunction():
        g = Grid(SQ, 256)
        xx, yy = g.meshes()
        vel = bs.velocity(ScalarField(g, np.sin(np.pi * xx) * np.sin(np.pi * yy)))
        u1 = np.sin(np.pi * xx) * np.cos(np.pi * yy) / (2 * np.pi)
        u2 = -np.cos(np.pi * xx) * np.sin(np.pi * yy) / (2 * np.pi)
        return float(np.abs(vel.u - np.stack([u1, u2], axis=-1)).max()), 1e-8

    def p_divergence_free():
        g = Grid(SQ, 128)
        xx, yy = g.meshes()
        w = ScalarField(g, np.sin(2 * np.pi * xx) * np.sin(np.pi * yy)
                        + 0.5 * np.sin(np.pi * xx) * np.sin(3 * np.pi * yy))
        return float(np.abs(bs.divergence(bs.velocity(w))).max()), 1e-8

    def p_normal_trace():
        g = Grid(SQ, 128)
        xx, yy = g.meshes()
        w = ScalarField(g, np.sin(np.pi * xx) * np.sin(2 * np.pi * yy))
        return bs.velocity(w).normal_trace_max(), 1e-8

    def p_cutoff_bound():
        v = rng.standard_normal((500, 2)) * 3
        worst = 0.0
        for M in (0.5, 2.0):
            fv = bs.cutoff(v, M)
            worst = max(worst, float(np.hypot(fv[:, 0], fv[:, 1]).max()) - M)
        return worst, 1e-12

    def p_cutoff_lipschitz():
        v = rng.standard_normal((400, 2)) * 3
        w = rng.standard_normal((400, 2)) * 3
        worst = 0.0
        for M in (0.3, 1.0, 4.0):
            num = np.hypot(*(bs.cutoff(v, M) - bs.cutoff(w, M)).T)
            den = np.hypot(*(v - w).T)
            worst = max(worst, float((num / den).max()))
        return worst, 2.0 + 1e-12

    def p_reflect_interior_fixed():
        pts = rng.uniform(0.01, 0.99, (300, 2))
        pos, disp = reflect(SQ, pts)
        return float(np.abs(pos - pts).max() + np.abs(disp).max()), 0.0 + 1e-15

    def p_reflect_idempotent():
        cand = rng.uniform(-1.0, 2.0, (500, 2))
        pos, _ = reflect(SQ, cand)
        pos2, disp2 = reflect(SQ, pos)
        return float(np.abs(disp2).max() + np.abs(pos2 - pos).max()), 1e-15

    def p_reflect_displacement_bound():
        cand = rng.uniform(-0.9, 1.9, (2000, 2))
        pos, _ = reflect(SQ, cand)
        dist = SQ.boundary_distance(cand)
        outside = ~SQ.contains(cand)
        moved = np.hypot(*(pos - cand).T)
        return float((moved[outside] - 2 * dist[outside]).max()), 1e-12

    return [
        ("kernel-mass", p_kernel_mass),
        ("kernel-symmetry", p_kernel_symmetry),
        ("chapman-kolmogorov", p_chapman_kolmogorov),
        ("image-vs-series", p_image_series_agreement),
        ("kernel-gaussian-envelope", p_kernel_envelope),
        ("ultracontractive-rate", p_ultracontractivity),
        ("semigroup-mass", p_semigroup_mass),
        ("semigroup-composition", p_semigroup_composition),
        ("gradient-estimate", p_gradient_estimate),
        ("fractional-group", p_fractional_group),
        ("biot-savart-eigenfunction", p_biot_savart_eigenfunction),
        ("divergence-free", p_divergence_free),
        ("normal-trace", p_normal_trace),
        ("cutoff-bound", p_cutoff_bound),
        ("cutoff-lipschitz", p_cutoff_lipschitz),
        ("reflect-interior-fixed", p_reflect_interior_fixed),
        ("reflect-idempotent", p_reflect_idempotent),
        ("reflect-displacement-bound", p_reflect_displacement_bound),
    ]


def run_selftest(fault=None, out=print) -> int:
    """Run every property; returns the number of failures."""
    failures = 0
    for name, prop in _properties(fault=fault):
        measured, tol = prop()
        ok = measured <= tol
        failures += 0 if ok else 1
        out(f"{'PASS' if ok else 'FAIL'} {name}: measured {measured:.3e} (tol {tol:.3e})")
    return failures
