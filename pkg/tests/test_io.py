from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from vssph.calibration import ReferenceConstants
from vssph.io import (
    MetricsWriter,
    SceneFileError,
    append_metrics,
    format_scene,
    load_scene,
    metrics_header,
    parse_scene,
    read_metrics,
    read_snapshot,
    write_snapshot,
)
from vssph.scenes import SCENES, dambreak_config
from vssph.solver import ParticleState, StepInfo

DATA = Path(__file__).parent / "data"

DAMBREAK_TEXT = """\
# 2D dambreak, reference parameters
d0 = 0.01
container = 0 0 0.8 0.6
fluid_box = 0 0 0.2 0.4
cn = 0.2
ct = 0.0
kappa = 0.1
"""


def test_dambreak_scene_accepted_and_echoed():
    cfg = parse_scene(DAMBREAK_TEXT)
    assert (cfg.cn, cfg.ct, cfg.kappa) == (0.2, 0.0, 0.1)
    echoed = format_scene(cfg)
    assert "cn = 0.2\n" in echoed and "kappa = 0.1\n" in echoed
    assert parse_scene(echoed) == cfg


@pytest.mark.parametrize("name", sorted(SCENES))
def test_builtin_scenes_round_trip(name):
    cfg = SCENES[name]()
    assert parse_scene(format_scene(cfg)) == cfg


def test_negative_kappa_rejected():
    with pytest.raises(SceneFileError, match="kappa"):
        parse_scene(DAMBREAK_TEXT.replace("kappa = 0.1", "kappa = -0.1"))


def test_missing_d0_named():
    with pytest.raises(SceneFileError, match="'d0'"):
        parse_scene(DAMBREAK_TEXT.replace("d0 = 0.01\n", ""))


def test_unknown_key_has_line_number():
    with pytest.raises(SceneFileError, match=r":3: unknown key 'viscosity'"):
        parse_scene("d0 = 0.01\nfluid_box = 0 0 1 1\nviscosity = 1\n", source="s")


@pytest.mark.parametrize("text,match", [
    ("d0 = 0.01\nd0 = 0.02\nfluid_box = 0 0 1 1\n", "duplicate"),
    ("d0 = abc\nfluid_box = 0 0 1 1\n", "bad value"),
    ("d0 = 0.01\nfluid_box = 0 0 1\n", "bad value"),
    ("d0 = 0.01\nfluid_box 0 0 1 1\n", "key = value"),
    ("d0 = 0.01\nfluid_box = 0 0 1 1\nwarm_start = maybe\n", "bad value"),
    ("d0 = 0.01\nfluid_box = 0 0 1 1\nkernel = gaussian\n", "gaussian"),
])
def test_malformed_scenes(text, match):
    with pytest.raises(SceneFileError, match=match):
        parse_scene(text)


def test_every_model_parameter_settable():
    text = DAMBREAK_TEXT + "\n".join([
        "lambda = 0.5", "h_ratio = 2.0", "kernel = cubic_spline", "delta = 0.005",
        "epsilon = 0.2", "eta0_coeff = 0.001", "shift_iterations = 4",
    ]) + "\n"
    cfg = parse_scene(text)
    assert (cfg.lam, cfg.h_ratio, cfg.kernel, cfg.delta) == (0.5, 2.0, "cubic_spline", 0.005)
    assert (cfg.epsilon, cfg.eta0_coeff, cfg.shift_iterations) == (0.2, 0.001, 4)


def test_load_scene(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(DAMBREAK_TEXT)
    cfg, solver = load_scene(path)
    assert cfg.d0 == 0.01 and solver.rho0 == 1000.0
    with pytest.raises(SceneFileError, match="cannot read"):
        load_scene(tmp_path / "missing.txt")


def handmade_sim(n=3):
    x = np.array([[0.1, 0.2], [0.3, -0.25], [1.0 / 3.0, 0.5]])[:n]
    v = np.array([[1.0, -2.0], [0.0, 0.5], [1e-9, 3.25]])[:n]
    st = ParticleState(x, v, pressure=np.array([1.5, -2.0, 0.0])[:n],
                       classes=np.array([0, 1, 3], dtype=np.int8)[:n],
                       concentration=np.array([1.0, 0.5, 0.75])[:n], t=0.125, step=7)
    consts = ReferenceConstants(12.7296, 1.0777, 0.35718, 0.547, 1.0)
    return SimpleNamespace(state=st, d0=0.01, kernel=SimpleNamespace(h=0.025), consts=consts)


def test_snapshot_matches_golden(tmp_path):
    path = tmp_path / "snap.txt"
    write_snapshot(handmade_sim(), path)
    assert path.read_text() == (DATA / "golden_3p.txt").read_text()


def test_snapshot_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    sim = handmade_sim()
    sim.state.positions = rng.normal(size=(3, 2))
    sim.state.pressure = rng.normal(size=3) * 1e4
    path = tmp_path / "snap.txt"
    write_snapshot(sim, path)
    snap = read_snapshot(path)
    np.testing.assert_array_equal(snap.positions, sim.state.positions)
    np.testing.assert_array_equal(snap.velocities, sim.state.velocities)
    np.testing.assert_array_equal(snap.pressure, sim.state.pressure)
    np.testing.assert_array_equal(snap.classes, sim.state.classes)
    np.testing.assert_array_equal(snap.concentration, sim.state.concentration)
    assert (snap.t, snap.step, snap.d0, snap.h) == (0.125, 7, 0.01, 0.025)
    assert snap.constants["alpha0"] == 12.7296


def test_empty_snapshot_is_header_only(tmp_path):
    sim = handmade_sim()
    sim.state = ParticleState(np.zeros((0, 2)), np.zeros((0, 2)))
    path = tmp_path / "empty.txt"
    write_snapshot(sim, path)
    lines = path.read_text().splitlines()
    assert all(line.startswith("#") for line in lines)
    assert read_snapshot(path).positions.shape == (0, 2)


def test_snapshot_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("hello\n")
    with pytest.raises(ValueError, match="not a snapshot"):
        read_snapshot(bad)
    with pytest.raises(OSError, match="cannot write snapshot"):
        write_snapshot(handmade_sim(), tmp_path / "nodir" / "x.txt")


def info(step, t, xi=(0.5, 0.25)):
    return StepInfo(step, t, 0.001, 12, 0.5, list(xi), 0.009, -1.0, 2.0, 1e-6, 0.99)


def test_metrics_file(tmp_path):
    path = tmp_path / "m.csv"
    w = MetricsWriter(path, 3, {"alpha0": 12.7296})
    w.append(info(1, 0.001))
    w.append(info(2, 0.002, xi=(0.1,)))
    with pytest.raises(ValueError):
        w.append(info(3, 0.002))
    text = path.read_text().splitlines()
    assert text[0] == "# alpha0 = 12.7296"
    assert text[1] == ",".join(metrics_header(3))
    m = read_metrics(path)
    np.testing.assert_array_equal(m["step"], [1, 2])
    np.testing.assert_array_equal(m["xi_01"], [0.5, 0.1])
    assert np.isnan(m["xi_03"]).all() and np.isnan(m["xi_02"][1])


def test_append_metrics_creates_header(tmp_path):
    path = tmp_path / "new.csv"
    append_metrics(info(1, 0.001), path, 2)
    assert path.read_text().splitlines()[0].startswith("step,t,dt,cg_iterations,eta,xi_01,xi_02")


def test_dambreak_config_defaults_match_text():
    cfg = dambreak_config()
    assert (cfg.cn, cfg.ct, cfg.kappa) == (0.2, 0.0, 0.1)
