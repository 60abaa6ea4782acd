import numpy as np
import pytest

from vortexlab.cli import main
from vortexlab.norms import NormSpec, trajectory_error
from vortexlab.selftest import run_selftest
from vortexlab.snapshots import read_csv, read_snapshot

TINY = """
[run]
out = {out}

[sim]
n = 4
nu = 0.1
m = {m}
k_sub = 4
seed = 3
output_times = 0,0.5,1

[data]
omega0 = {omega0}
g = {g}

[sweep]
n_list = 4,8
seeds = 2

[norms]
kinds = lp(2), sup
"""


def write_cfg(tmp_path, name="cfg.ini", **kw):
    base = dict(out=str(tmp_path / "out"), m="0", omega0="0", g="1")
    base.update(kw)
    path = tmp_path / name
    path.write_text(TINY.format(**base))
    return path


# -- selftest -------------------------------------------------------------------

def test_selftest_all_properties_pass(capsys):
    lines = []
    failures = run_selftest(out=lines.append)
    assert failures == 0
    assert len(lines) >= 12
    assert all(line.startswith("PASS") for line in lines)


def test_selftest_fault_injection_trips_chapman_kolmogorov():
    lines = []
    failures = run_selftest(fault="multiplier", out=lines.append)
    assert failures >= 1
    assert any(line.startswith("FAIL chapman-kolmogorov") for line in lines)


def test_selftest_cli_exit_codes():
    assert main(["selftest-kernel"]) == 0
    assert main(["selftest-kernel", "--inject-fault", "multiplier"]) == 1


# -- pde ------------------------------------------------------------------------

def test_cmd_pde_outputs_and_determinism(tmp_path, capsys):
    cfg = write_cfg(tmp_path, omega0="gauss(0.5, 0.5, 0.15)", g="0")
    assert main(["pde", "--config", str(cfg)]) == 0
    out1 = capsys.readouterr().out
    assert "recommended cutoff m" in out1
    cache = next((tmp_path / "out").glob("pde_*"))
    snaps1 = {p.name: p.read_bytes() for p in cache.glob("t_*.snap")}
    assert len(snaps1) == 3
    # config echo is byte-exact
    assert (cache / "config.txt").read_bytes() == cfg.read_bytes()
    # rerun hits the cache and reproduces files byte for byte
    assert main(["pde", "--config", str(cfg)]) == 0
    out2 = capsys.readouterr().out
    assert "cached" in out2
    for name, payload in snaps1.items():
        assert (cache / name).read_bytes() == payload


# -- simulate ---------------------------------------------------------------------

def test_cmd_simulate_layout_and_headers(tmp_path):
    cfg = write_cfg(tmp_path, g="1")
    assert main(["simulate", "--config", str(cfg), "--seed", "9"]) == 0
    run_dirs = [p for p in (tmp_path / "out").iterdir() if not p.name.startswith("pde_")]
    assert len(run_dirs) == 1
    snaps = sorted(run_dirs[0].glob("t_*.snap"))
    assert [p.name for p in snaps] == ["t_0.snap", "t_1.snap", "t_2.snap"]
    for p in snaps:
        meta, _ = read_snapshot(p)
        assert meta["seed"] == 9
        assert meta["n"] == 4
    header, rows = read_csv(run_dirs[0] / "record.csv")
    assert header[:2] == ["n", "seed"]
    assert rows[0][1] == "9"


def test_cmd_simulate_particle_dumps(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["simulate", "--config", str(cfg), "--dump-particles"]) == 0
    run_dir = next(p for p in (tmp_path / "out").iterdir() if not p.name.startswith("pde_"))
    dumps = sorted(run_dir.glob("particles_t_*.txt"))
    assert len(dumps) == 3
    first = dumps[0].read_text().splitlines()
    assert first[0].startswith("# index sign t_i")
    assert len(first) == 1 + 2 * (9 + 16)  # both populations, interior + boundary


def test_missing_config_key_is_named_error(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[sim]\nn = 4\nnu = 0.1\nm = 0\n")  # no [data]
    assert main(["simulate", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "[data] omega0" in err


def test_snapshot_file_roundtrip_reproduces_errors(tmp_path):
    # persisted snapshots must reproduce in-memory trajectory errors exactly
    cfg = write_cfg(tmp_path, omega0="gauss(0.5, 0.5, 0.2)", g="0")
    assert main(["simulate", "--config", str(cfg)]) == 0
    run_dir = next(p for p in (tmp_path / "out").iterdir() if not p.name.startswith("pde_"))
    loaded = []
    for p in sorted(run_dir.glob("t_*.snap")):
        meta, f = read_snapshot(p)
        loaded.append((meta["time"], f))
    from vortexlab.config import build_sim_config, load_config
    from vortexlab.particles import run

    conf = load_config(str(cfg))
    snaps, _ = run(build_sim_config(conf))
    spec = NormSpec("lp", p=2)
    sup_mem, per_mem = trajectory_error(snaps, snaps, spec)  # zero baseline
    sup_file, per_file = trajectory_error(snaps, loaded, spec)
    assert sup_mem == 0.0
    assert sup_file < 1e-12  # bit-exact persistence keeps the difference at zero


# -- converge ----------------------------------------------------------------------

def test_converge_zero_data_all_errors_zero(tmp_path):
    cfg = write_cfg(tmp_path, omega0="0", g="0")
    assert main(["converge", "--config", str(cfg)]) == 0
    header, rows = read_csv(tmp_path / "out" / "errors.csv")
    idx = header.index("sup_over_time_error")
    samples = [r for r in rows if r[0] == "sample"]
    assert len(samples) == 2 * 2 * 2  # n values x seeds x norms
    assert all(float(r[idx]) == 0.0 for r in samples)
    assert all(r[-1] == "ok" for r in samples)


def test_converge_csv_statistics_recompute(tmp_path):
    cfg = write_cfg(tmp_path, omega0="0", g="1", m="0")
    assert main(["converge", "--config", str(cfg)]) == 0
    header, rows = read_csv(tmp_path / "out" / "errors.csv")
    idx = header.index("sup_over_time_error")
    for n in ("4", "8"):
        for kind in ("lp(2)", "sup"):
            samples = [float(r[idx]) for r in rows
                       if r[0] == "sample" and r[1] == n and r[3] == kind]
            mean = [float(r[idx]) for r in rows
                    if r[0] == "mean" and r[1] == n and r[3] == kind]
            std = [float(r[idx]) for r in rows
                   if r[0] == "std" and r[1] == n and r[3] == kind]
            assert len(samples) == 2 and len(mean) == 1 and len(std) == 1
            assert mean[0] == pytest.approx(np.mean(samples), rel=1e-12)
            assert std[0] == pytest.approx(np.std(samples), rel=1e-12, abs=1e-300)


def test_converge_threads_do_not_change_bytes(tmp_path):
    cfg = write_cfg(tmp_path, omega0="0", g="1", m="0")
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    assert main(["converge", "--config", str(cfg), "--out", str(out1), "--threads", "1"]) == 0
    assert main(["converge", "--config", str(cfg), "--out", str(out2), "--threads", "4"]) == 0
    assert (out1 / "errors.csv").read_bytes() == (out2 / "errors.csv").read_bytes()


def test_converge_reuses_pde_cache(tmp_path, capsys):
    cfg = write_cfg(tmp_path, omega0="0", g="1", m="0")
    assert main(["converge", "--config", str(cfg)]) == 0
    cache = next((tmp_path / "out").glob("pde_*"))
    stamp = (cache / "modal.npz").stat().st_mtime_ns
    assert main(["converge", "--config", str(cfg)]) == 0
    assert (cache / "modal.npz").stat().st_mtime_ns == stamp
