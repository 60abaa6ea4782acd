import numpy as np
import pytest

from vortexlab.config import (
    build_pde_config,
    build_sim_config,
    canonical_text,
    fingerprint,
    load_config_text,
    norm_specs,
    pde_fingerprint,
)
from vortexlab.errors import ConfigError
from vortexlab.exprs import parse_boundary_expr, parse_field_expr
from vortexlab.fields import Grid, ScalarField
from vortexlab.geometry import DomainSpec
from vortexlab.snapshots import (
    SnapshotFormatError,
    read_csv,
    read_snapshot,
    write_csv,
    write_snapshot,
)

BASE = """
[sim]
n = 8
nu = 0.2
m = 0

[data]
omega0 = 0
g = 1
"""


# -- expressions ---------------------------------------------------------------

def test_field_expression_vocabulary():
    fn = parse_field_expr("2*gauss(0.35, 0.5, 0.1) - cos(pi*x)*sin(2*pi*y) + pos(x - 0.5)")
    xx, yy = np.meshgrid(np.linspace(0, 1, 5), np.linspace(0, 1, 5), indexing="ij")
    vals = fn(xx, yy)
    assert vals.shape == xx.shape
    expected = (
        2 * np.exp(-((xx - 0.35) ** 2 + (yy - 0.5) ** 2) / (2 * 0.01))
        - np.cos(np.pi * xx) * np.sin(2 * np.pi * yy)
        + np.maximum(xx - 0.5, 0)
    )
    assert np.allclose(vals, expected, atol=1e-14)


def test_constant_expression_broadcasts():
    fn = parse_field_expr("0.75")
    xx = np.zeros((3, 4))
    assert fn(xx, xx).shape == (3, 4)


def test_boundary_expression():
    fn = parse_boundary_expr("0.5*(1 + cos(2*pi*s))*t")
    t = np.array([0.0, 1.0])
    s = np.array([0.0, 0.5])
    assert np.allclose(fn(t, s), [0.0, 0.0])
    assert fn(1.0, 0.0) == pytest.approx(1.0)


def test_expression_rejects_unknowns():
    with pytest.raises(ConfigError):
        parse_field_expr("__import__('os')")
    with pytest.raises(ConfigError):
        parse_field_expr("q + 1")
    with pytest.raises(ConfigError):
        parse_boundary_expr("gauss(0.1, 0.1, 0.1)")  # field-only bump
    with pytest.raises(ConfigError):
        parse_field_expr("x if y else 0")


# -- config parsing -------------------------------------------------------------

def test_defaults_and_required_keys():
    cfg = load_config_text(BASE)
    assert cfg["sim"]["c_epsilon"] == 0.5
    assert cfg["sweep"]["n_list"] == (8, 16, 32)
    assert cfg["pde"]["j"] == 64
    assert cfg["run"]["domain"] == "unit_square"
    with pytest.raises(ConfigError):
        load_config_text("[sim]\nn = 8\n")


def test_unknown_keys_are_errors():
    with pytest.raises(ConfigError):
        load_config_text(BASE + "\n[sim2]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config_text(BASE.replace("nu = 0.2", "nu = 0.2\nviscosity = 0.2"))


def test_time_range_parsing():
    cfg = load_config_text(BASE + "\n[run]\nout = ./o\n")
    assert cfg["sim"]["output_times"][0] == 0.0
    cfg2 = load_config_text(BASE.replace("m = 0", "m = 0\noutput_times = 0:0.25:1"))
    assert cfg2["sim"]["output_times"] == (0.0, 0.25, 0.5, 0.75, 1.0)
    cfg3 = load_config_text(BASE.replace("m = 0", "m = 0\noutput_times = 0,0.5,1"))
    assert cfg3["sim"]["output_times"] == (0.0, 0.5, 1.0)


def test_m_parsing_variants():
    assert load_config_text(BASE)["sim"]["m"] == 0.0
    assert load_config_text(BASE.replace("m = 0", "m = auto"))["sim"]["m"] == "auto"
    assert load_config_text(BASE.replace("m = 0", "m = inf"))["sim"]["m"] == np.inf


def test_fingerprint_stability_and_sensitivity():
    a = load_config_text(BASE)
    b = load_config_text(BASE + "\n")                      # whitespace only
    c = load_config_text(BASE.replace("nu = 0.2", "nu = 0.25"))
    assert fingerprint(a) == fingerprint(b)
    assert fingerprint(a) != fingerprint(c)
    assert canonical_text(a) == canonical_text(b)


def test_pde_fingerprint_ignores_sweep_but_tracks_data():
    a = load_config_text(BASE)
    b = load_config_text(BASE + "\n[sweep]\nseeds = 3\n")
    c = load_config_text(BASE.replace("g = 1", "g = 2"))
    times = (0.0, 0.5, 1.0)
    assert pde_fingerprint(a, times) == pde_fingerprint(b, times)
    assert pde_fingerprint(a, times) != pde_fingerprint(c, times)


def test_builders():
    cfg = load_config_text(BASE)
    sim = build_sim_config(cfg, n=16, seed=3)
    assert sim.n == 16 and sim.seed == 3 and sim.m == 0.0
    sim.validate()
    pdecfg = build_pde_config(cfg, output_times=(0.0, 0.5, 1.0))
    pdecfg.validate()
    with pytest.raises(ConfigError):
        build_sim_config(load_config_text(BASE.replace("m = 0", "m = auto")))
    specs = norm_specs(load_config_text(BASE + "\n[norms]\nkinds = lp(2), sup, sobolev(0.5)\n"))
    assert [s.label() for s in specs] == ["lp(2)", "sup", "sobolev(0.5)"]


# -- snapshots -------------------------------------------------------------------

def test_snapshot_roundtrip_bit_exact(tmp_path):
    grid = Grid(DomainSpec("unit_square"), 32)
    rng = np.random.default_rng(0)
    f = ScalarField(grid, rng.standard_normal((32, 32)))
    path = tmp_path / "t_0.snap"
    write_snapshot(path, 0.3, f, n=8, epsilon=0.17, nu=0.2, m=1.5, seed=42)
    meta, back = read_snapshot(path)
    assert np.array_equal(back.values, f.values)
    assert meta["time"] == 0.3 and meta["seed"] == 42 and meta["n"] == 8
    assert meta["epsilon"] == 0.17 and meta["nu"] == 0.2 and meta["m"] == 1.5


def test_snapshot_truncation_detected(tmp_path):
    grid = Grid(DomainSpec("unit_square"), 16)
    f = ScalarField.zeros(grid)
    path = tmp_path / "t_0.snap"
    write_snapshot(path, 0.0, f)
    text = path.read_text().splitlines()
    path.write_text("\n".join(text[:10]) + "\n")
    with pytest.raises(SnapshotFormatError):
        read_snapshot(path)


def test_csv_roundtrip(tmp_path):
    header = ["n", "seed", "value"]
    rows = [[8, 0, 0.123456789012345678], [16, 1, float("nan")]]
    path = tmp_path / "r.csv"
    write_csv(path, header, rows)
    h2, r2 = read_csv(path)
    assert h2 == header
    assert float(r2[0][2]) == rows[0][2]
    assert np.isnan(float(r2[1][2]))
    assert path.read_bytes().endswith(b"\n")
    assert b"\r" not in path.read_bytes()
