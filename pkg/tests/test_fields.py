import numpy as np
import pytest

from vortexlab.fields import (
    Grid,
    ScalarField,
    analyze_mixed,
    bilinear,
    cos_coeffs,
    cos_values,
    gradient_values,
    parseval_weights,
    sin_coeffs,
    sin_values,
    synth_mixed,
)
from vortexlab.geometry import DomainSpec

GRID = Grid(DomainSpec("unit_square"), 64)


def test_cos_roundtrip_random():
    rng = np.random.default_rng(0)
    v = rng.standard_normal((GRID.g, GRID.g))
    back = cos_values(cos_coeffs(v))
    assert np.abs(back - v).max() < 1e-12 * max(1.0, np.abs(v).max())


def test_cos_coeffs_of_eigenmode_are_exact():
    xx, yy = GRID.meshes()
    v = np.cos(3 * np.pi * xx) * np.cos(5 * np.pi * yy)
    a = cos_coeffs(v)
    expected = np.zeros_like(a)
    expected[3, 5] = 1.0
    assert np.abs(a - expected).max() < 1e-13


def test_sin_roundtrip_random():
    rng = np.random.default_rng(1)
    v = rng.standard_normal((GRID.g - 2, GRID.g - 2))
    back = sin_values(sin_coeffs(v))
    assert np.abs(back - v).max() < 1e-12


def test_mixed_synth_analyze_roundtrip():
    rng = np.random.default_rng(2)
    c = rng.standard_normal((GRID.g - 2, GRID.g))
    vals = synth_mixed(c, sin_axis=0)
    assert np.abs(vals[0]).max() == 0.0 and np.abs(vals[-1]).max() == 0.0
    back = analyze_mixed(vals, sin_axis=0)
    assert np.abs(back - c).max() < 1e-12


def test_gradient_matches_closed_form():
    xx, yy = GRID.meshes()
    v = np.cos(2 * np.pi * xx) * np.cos(np.pi * yy)
    fx, fy = gradient_values(v)
    assert np.abs(fx + 2 * np.pi * np.sin(2 * np.pi * xx) * np.cos(np.pi * yy)).max() < 1e-10
    assert np.abs(fy + np.pi * np.cos(2 * np.pi * xx) * np.sin(np.pi * yy)).max() < 1e-10


def test_trapezoid_mass_of_constant():
    f = ScalarField(GRID, np.ones((GRID.g, GRID.g)))
    assert f.mass() == pytest.approx(1.0, abs=1e-14)


def test_mass_equals_constant_mode_coefficient():
    rng = np.random.default_rng(3)
    f = ScalarField(GRID, rng.standard_normal((GRID.g, GRID.g)))
    assert f.mass() == pytest.approx(f.spectrum[0, 0], abs=1e-12)


def test_parseval_weights_match_trapezoid_l2():
    rng = np.random.default_rng(4)
    v = rng.standard_normal((GRID.g, GRID.g))
    a = cos_coeffs(v)
    quad = np.sum(v**2 * GRID.node_weights()) * GRID.h**2
    spectral = np.sum(a**2 * parseval_weights(GRID.g))
    assert quad == pytest.approx(spectral, rel=1e-12)


def test_bilinear_exact_on_nodes_and_linear_fields():
    xx, yy = GRID.meshes()
    v = 2.0 * xx - 0.5 * yy + 0.25
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(200, 2))
    interp = bilinear(GRID, v, pts)
    assert np.abs(interp - (2.0 * pts[:, 0] - 0.5 * pts[:, 1] + 0.25)).max() < 1e-12
    # corner positions are handled by index clamping
    assert bilinear(GRID, v, np.array([1.0, 1.0])) == pytest.approx(1.75)


def test_disk_grid_mask_and_mass():
    grid = Grid(DomainSpec("unit_disk"), 129)
    mask = grid.inside_mask()
    f = ScalarField(grid, mask.astype(float))
    assert f.mass() == pytest.approx(np.pi, rel=2e-2)
