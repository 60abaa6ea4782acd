import numpy as np
import pytest

from vortexlab.fields import Grid, ScalarField
from vortexlab.geometry import DomainSpec
from vortexlab.heat import KernelParams, apply_semigroup
from vortexlab.norms import NormSpec, norm, trajectory_error

GRID = Grid(DomainSpec("unit_square"), 64)


def test_constant_field_norms():
    f = ScalarField(GRID, np.ones((64, 64)))
    for p in (1.0, 2.0, 3.5, 7.0):
        assert norm(f, NormSpec("lp", p=p)) == pytest.approx(1.0, abs=1e-12)
    assert norm(f, NormSpec("sup")) == 1.0


def test_sobolev_single_mode_closed_form():
    xx, _ = GRID.meshes()
    f = ScalarField(GRID, np.cos(np.pi * xx))
    for nu in (1.0, 0.2):
        for alpha in (-1.0, 0.0, 0.8, 2.0):
            got = norm(f, NormSpec("sobolev", alpha=alpha, nu=nu))
            want = (1 + nu * np.pi**2) ** (alpha / 2) / np.sqrt(2)
            assert got == pytest.approx(want, rel=1e-12)


def test_sobolev_zero_matches_l2_on_random_fields():
    rng = np.random.default_rng(0)
    for _ in range(5):
        f = ScalarField(GRID, rng.standard_normal((64, 64)))
        assert norm(f, NormSpec("sobolev", alpha=0.0)) == pytest.approx(
            norm(f, NormSpec("lp", p=2.0)), rel=1e-12
        )


def test_rejects_bad_p_and_kind():
    with pytest.raises(ValueError):
        NormSpec("lp", p=0.5)
    with pytest.raises(ValueError):
        NormSpec("l2")


def test_triangle_inequality_and_homogeneity():
    rng = np.random.default_rng(1)
    specs = [NormSpec("sup"), NormSpec("lp", p=1), NormSpec("lp", p=3),
             NormSpec("sobolev", alpha=0.6), NormSpec("sobolev", alpha=-0.7)]
    for _ in range(20):
        a = ScalarField(GRID, rng.standard_normal((64, 64)))
        b = ScalarField(GRID, rng.standard_normal((64, 64)))
        c = rng.standard_normal()
        for spec in specs:
            assert norm(a + b, spec) <= norm(a, spec) + norm(b, spec) + 1e-10
            assert norm(c * a, spec) == pytest.approx(abs(c) * norm(a, spec), rel=1e-10)


def test_sobolev_monotone_in_alpha():
    rng = np.random.default_rng(2)
    f = ScalarField(GRID, rng.standard_normal((64, 64)))
    alphas = [-1.5, -0.5, 0.0, 0.5, 1.5]
    vals = [norm(f, NormSpec("sobolev", alpha=a)) for a in alphas]
    assert all(v1 <= v2 + 1e-12 for v1, v2 in zip(vals, vals[1:]))


def test_smoothing_contracts_sup_and_l2():
    rng = np.random.default_rng(3)
    params = KernelParams(nu=1.0)
    f = ScalarField(GRID, rng.standard_normal((64, 64)))
    for t in (1e-3, 0.05, 0.5):
        g = apply_semigroup(f, t, params)
        assert norm(g, NormSpec("sup")) <= norm(f, NormSpec("sup")) + 1e-12
        assert norm(g, NormSpec("lp", p=2)) <= norm(f, NormSpec("lp", p=2)) + 1e-12


def test_trajectory_error_basics():
    zero = ScalarField.zeros(GRID)
    c = ScalarField(GRID, np.full((64, 64), 0.7))
    times = [0.0, 0.5, 1.0]
    snaps_a = [(t, zero) for t in times]
    snaps_b = [(t, c) for t in times]
    sup, per = trajectory_error(snaps_a, snaps_a, NormSpec("lp", p=2))
    assert sup == 0.0 and per == [0.0, 0.0, 0.0]
    sup, per = trajectory_error(snaps_a, snaps_b, NormSpec("lp", p=2))
    assert sup == pytest.approx(0.7, abs=1e-12)


def test_trajectory_error_mismatch_raises():
    zero = ScalarField.zeros(GRID)
    with pytest.raises(ValueError):
        trajectory_error([(0.0, zero)], [(0.1, zero)], NormSpec("sup"))
    other = ScalarField.zeros(Grid(DomainSpec("unit_square"), 32))
    with pytest.raises(ValueError):
        trajectory_error([(0.0, zero)], [(0.0, other)], NormSpec("sup"))
    with pytest.raises(ValueError):
        trajectory_error([(0.0, zero)], [], NormSpec("sup"))
