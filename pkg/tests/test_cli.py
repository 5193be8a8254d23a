import numpy as np
import pytest

from vssph.cli import main
from vssph.io import read_metrics, read_snapshot


def test_calibrate_prints_alpha0(capsys):
    assert main(["calibrate"]) == 0
    out = capsys.readouterr().out
    assert "alpha0  = 12.7296" in out
    assert "beta0   = 1" in out


def test_kernels_verdict(capsys):
    assert main(["kernels", "--samples", "10000"]) == 0
    out = capsys.readouterr().out
    assert "proposed_quartic: stable" in out
    assert "cubic_spline: unstable" in out


def test_run_scene_writes_outputs(tmp_path, capsys):
    out = tmp_path / "hydro"
    rc = main(["scene", "hydrostatic", "--set", "d0 = 0.02", "--set", "frame_interval = 0.05",
               "--steps", "100", "--out-dir", str(out)])
    assert rc == 0
    m = read_metrics(out / "metrics.csv")
    assert len(m["step"]) == 100
    assert np.all(np.diff(m["t"]) > 0)
    frames = sorted(out.glob("frame_*.txt"))
    assert len(frames) >= 2
    snap = read_snapshot(out / "final.txt")
    assert snap.step == 100 and len(snap.positions) == 100
    assert "100 steps" in capsys.readouterr().out


def test_run_scene_file(tmp_path):
    scene = tmp_path / "s.txt"
    scene.write_text("d0 = 0.05\ncontainer = 0 0 0.5 0.5\nfluid_box = 0 0 0.5 0.25\n"
                     "shift_iterations = 2\n")
    assert main(["run", str(scene), "--steps", "3", "--out-dir", str(tmp_path / "o"),
                 "--threads", "1", "--warm-start", "--seed", "9"]) == 0
    echoed = (tmp_path / "o" / "scene.txt").read_text()
    assert "warm_start = true" in echoed and "seed = 9" in echoed
    assert "xi_02" in (tmp_path / "o" / "metrics.csv").read_text()


def test_print_scene(capsys):
    assert main(["scene", "dambreak", "--print"]) == 0
    out = capsys.readouterr().out
    assert "cn = 0.2\n" in out and "container = 0.0 0.0 0.8 0.6\n" in out


def test_frames_limit(tmp_path):
    out = tmp_path / "f"
    assert main(["scene", "hydrostatic", "--set", "d0=0.05", "--set", "frame_interval=0.01",
                 "--frames", "2", "--out-dir", str(out)]) == 0
    assert sorted(p.name for p in out.glob("frame_*.txt")) == [
        "frame_0000.txt", "frame_0001.txt", "frame_0002.txt"]
    assert read_snapshot(out / "frame_0002.txt").t == pytest.approx(0.02)


@pytest.mark.parametrize("argv", [["nope"], ["run"], ["calibrate", "--dim", "4"],
                                  ["scene", "hydrostatic", "--bogus"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 2


def test_scene_errors_exit_1(tmp_path, capsys):
    assert main(["scene", "hydrostatic", "--set", "bogus=1", "--print"]) == 1
    assert "unknown key 'bogus'" in capsys.readouterr().err
    assert main(["scene", "hydrostatic", "--set", "novalue", "--print"]) == 1
    assert main(["run", str(tmp_path / "missing.txt")]) == 1
    assert main(["scene", "hydrostatic", "--set", "kappa=-0.1", "--print"]) == 1


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("VSSPH_THREADS", "0")
    assert main(["scene", "hydrostatic", "--set", "d0=0.05", "--steps", "1",
                 "--out-dir", str(tmp_path)]) == 1
