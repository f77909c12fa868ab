import io
import json

import numpy as np
import pytest

from eetsim import ConfigError, extract_features, simulate
from eetsim.io import (build_manifest, compare_tables, compare_trajectories, read_csv,
                       trajectory_table, write_csv, write_manifest)

from conftest import make_config


@pytest.fixture(scope="module")
def sim():
    return simulate(make_config(77.0, 1, t_end=200.0, n_steps=201))


def test_csv_round_trip(tmp_path, sim):
    header, rows = trajectory_table(sim.trajectory, [(1, 2)])
    assert header == ["t_fs"] + [f"site{b}" for b in range(1, 8)] + ["re_rho_1_2", "im_rho_1_2"]
    path = tmp_path / "a.csv"
    write_csv(path, header, rows)
    back_header, back = read_csv(path)
    assert back_header == header
    assert np.array_equal(back, rows)


def test_stream_and_file_output_agree(tmp_path, sim):
    header, rows = trajectory_table(sim.trajectory)
    buf = io.StringIO()
    write_csv(buf, header, rows)
    write_csv(tmp_path / "a.csv", header, rows)
    assert buf.getvalue() == (tmp_path / "a.csv").read_text()


def test_identical_config_gives_identical_bytes(tmp_path):
    for name in ("a.csv", "b.csv"):
        s = simulate(make_config(300.0, 6, t_end=300.0, n_steps=301))
        write_csv(tmp_path / name, *trajectory_table(s.trajectory))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_bad_coherence_pair(sim):
    with pytest.raises(ConfigError):
        trajectory_table(sim.trajectory, [(0, 2)])


def test_read_csv_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("time,x\n0,1\n")
    with pytest.raises(ConfigError):
        read_csv(bad)


def test_manifest(tmp_path, sim):
    m = build_manifest(sim, extract_features(sim.trajectory.times,
                                             sim.trajectory.populations), "demo")
    path = tmp_path / "m.json"
    write_manifest(path, m)
    d = json.loads(path.read_text())
    assert d["scenario"] == "demo"
    assert np.allclose(d["eigenvalues_cm"], sim.eigensystem.energies, rtol=0, atol=0)
    assert np.array_equal(np.array(d["gamma_per_fs"]), sim.rates.gamma)
    assert d["config"]["temperature_K"] == 77.0
    assert "damping_time_fs" in d["features"]


def _table(t, cols):
    return np.column_stack([t] + list(cols))


def test_compare_with_itself():
    t = np.linspace(0, 10, 11)
    a = _table(t, [np.sin(t), np.cos(t)])
    c = compare_tables(a, a, ["x", "y"])
    assert c.overall_rms == 0 and np.all(c.rms == 0) and np.all(c.max_abs == 0)


def test_constant_offset():
    t = np.linspace(0, 10, 11)
    a = _table(t, [np.sin(t)])
    c = compare_tables(a, _table(t, [np.sin(t) + 0.1]), ["x"])
    assert c.rms[0] == pytest.approx(0.1, rel=1e-12)
    assert c.max_abs[0] == pytest.approx(0.1, rel=1e-12)


def test_interpolates_onto_coarser_grid():
    fine = np.linspace(0, 10, 101)
    coarse = np.linspace(0, 10, 6)
    c = compare_tables(_table(fine, [2 * fine]), _table(coarse, [2 * coarse]), ["x"])
    assert c.n_points == 6 and c.max_abs[0] < 1e-12


def test_disjoint_ranges():
    with pytest.raises(ConfigError):
        compare_tables(_table(np.arange(3.0), [np.zeros(3)]),
                       _table(np.arange(10.0, 13.0), [np.zeros(3)]), ["x"])


def test_full_versus_decoherence_only_site3(tmp_path):
    paths = []
    for mode in ("full", "decoherence_only"):
        s = simulate(make_config(77.0, 1, mode))
        p = tmp_path / f"{mode}.csv"
        write_csv(p, *trajectory_table(s.trajectory))
        paths.append(p)
    c = compare_trajectories(*paths)
    assert c.columns[2] == "site3"
    assert c.max_abs[2] > 0.15
    _, full = read_csv(paths[0])
    _, deco = read_csv(paths[1])
    assert full[-1, 3] - deco[-1, 3] > 0


def test_column_mismatch(tmp_path, sim):
    write_csv(tmp_path / "a.csv", *trajectory_table(sim.trajectory))
    write_csv(tmp_path / "b.csv", *trajectory_table(sim.trajectory, [(1, 2)]))
    with pytest.raises(ConfigError):
        compare_trajectories(tmp_path / "a.csv", tmp_path / "b.csv")
