import numpy as np
import pytest

from vortexlab.geometry import (
    DomainSpec,
    FoldEnvelopeError,
    GeometryError,
    boundary_map,
    inward_normal,
    reflect,
)

SQUARE = DomainSpec("unit_square")
DISK = DomainSpec("unit_disk", radius=1.0)


def test_perimeters():
    assert SQUARE.perimeter == 4.0
    assert DISK.perimeter == pytest.approx(2 * np.pi)


def test_boundary_map_square_corner_convention():
    bp = boundary_map(SQUARE, 0.0)
    assert bp.position == (0.0, 0.0)
    assert np.allclose(bp.normal, (1 / np.sqrt(2), 1 / np.sqrt(2)))


def test_boundary_map_square_edge_midpoint():
    bp = boundary_map(SQUARE, 0.125)
    assert bp.position == (0.5, 0.0)
    assert bp.normal == (0.0, 1.0)
    assert bp.arclength == 4.0


def test_boundary_map_disk():
    bp = boundary_map(DISK, 0.25)
    assert np.allclose(bp.position, (0.0, 1.0), atol=1e-15)
    assert np.allclose(bp.normal, (0.0, -1.0), atol=1e-15)
    assert bp.arclength == pytest.approx(2 * np.pi)


def test_boundary_map_rejects_out_of_range():
    for s in (-0.1, 1.0, 1.5):
        with pytest.raises(GeometryError):
            boundary_map(SQUARE, s)


def test_boundary_map_bijective_on_samples():
    ss = np.linspace(0, 1, 97, endpoint=False)
    pts = np.array([boundary_map(SQUARE, s).position for s in ss])
    assert len({tuple(np.round(p, 12)) for p in pts}) == len(ss)


def test_normal_points_inward():
    for dom in (SQUARE, DISK):
        for s in np.linspace(0, 1, 37, endpoint=False):
            bp = boundary_map(dom, s)
            probe = np.array(bp.position) + 1e-8 * np.array(bp.normal)
            assert dom.contains(probe)
            assert np.hypot(*bp.normal) == pytest.approx(1.0)


def test_inward_normal_examples():
    assert np.allclose(inward_normal(SQUARE, (1.0, 0.5)), (-1.0, 0.0))
    assert np.allclose(inward_normal(SQUARE, (0.3, 1.0)), (0.0, -1.0))
    assert np.allclose(inward_normal(DISK, (0.6, 0.8)), (-0.6, -0.8))


def test_inward_normal_rejects_interior():
    with pytest.raises(GeometryError):
        inward_normal(SQUARE, (0.5, 0.5))
    with pytest.raises(GeometryError):
        inward_normal(SQUARE, (0.3, 0.99))


def test_reflect_examples():
    pos, disp = reflect(SQUARE, np.array([-0.1, 0.5]))
    assert np.allclose(pos, (0.1, 0.5))
    assert np.allclose(disp, (0.2, 0.0))

    pos, disp = reflect(SQUARE, np.array([0.4, 0.6]))
    assert np.allclose(pos, (0.4, 0.6))
    assert np.allclose(disp, (0.0, 0.0))

    pos, disp = reflect(SQUARE, np.array([-0.05, 1.02]))
    assert np.allclose(pos, (0.05, 0.98))
    assert np.allclose(disp, (0.1, -0.04))


def test_reflect_envelope_violation():
    with pytest.raises(FoldEnvelopeError):
        reflect(SQUARE, np.array([-1.2, 0.5]))
    with pytest.raises(FoldEnvelopeError):
        reflect(DISK, np.array([2.5, 0.0]))


def test_reflect_idempotent_and_interior_fixed():
    rng = np.random.default_rng(7)
    cand = rng.uniform(-1.0, 2.0, size=(500, 2))
    pos, disp = reflect(SQUARE, cand)
    assert SQUARE.contains(pos).all()
    pos2, disp2 = reflect(SQUARE, pos)
    assert np.abs(disp2).max() == 0.0
    assert np.allclose(pos2, pos)

    interior = rng.uniform(0.01, 0.99, size=(200, 2))
    pos3, disp3 = reflect(SQUARE, interior)
    assert np.array_equal(pos3, interior)
    assert np.abs(disp3).max() == 0.0


def test_reflect_disk_radial():
    rng = np.random.default_rng(8)
    theta = rng.uniform(0, 2 * np.pi, 100)
    r = rng.uniform(1.0, 1.9, 100)
    cand = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    pos, disp = reflect(DISK, cand)
    assert np.all(np.hypot(pos[:, 0], pos[:, 1]) <= 1.0 + 1e-12)
    # displacement is radial: cross product with the candidate direction vanishes
    cross = disp[:, 0] * cand[:, 1] - disp[:, 1] * cand[:, 0]
    assert np.abs(cross).max() < 1e-12


def test_reflect_displacement_bounded_by_distance():
    rng = np.random.default_rng(9)
    cand = rng.uniform(-0.9, 1.9, size=(2000, 2))
    pos, _ = reflect(SQUARE, cand)
    dist = SQUARE.boundary_distance(cand)
    outside = ~SQUARE.contains(cand)
    moved = np.hypot(*(pos - cand).T)
    assert np.all(moved[outside] <= 2 * dist[outside] + 1e-12)
    assert np.all(moved[~outside] == 0.0)


def test_square_displacement_parallel_to_crossed_face_normal():
    # single-face crossing: displacement must align with that face's inward normal
    pos, disp = reflect(SQUARE, np.array([0.5, -0.2]))
    assert disp[0] == 0.0 and disp[1] > 0.0
    pos, disp = reflect(SQUARE, np.array([1.3, 0.5]))
    assert disp[1] == 0.0 and disp[0] < 0.0
