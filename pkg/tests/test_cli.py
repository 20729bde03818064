import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from agvsim import cli
from agvsim.camera import default_camera

DATA = Path(__file__).parent / "data"


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


# -- run ------------------------------------------------------------------------------------

def test_run_case1(tmp_path, capsys):
    code, out, _ = run(["run", "case1_straight", "--out", str(tmp_path)], capsys)
    assert code == 0
    m = kv(out)
    assert (m["starting_time_s"], m["settling_angle_deg"], m["settling_time_s"]) == ("0", "0", "0")
    d = tmp_path / "case1_straight"
    assert sorted(p.name for p in d.iterdir()) == ["events.csv", "metrics.txt", "trajectory.csv"]
    lines = (d / "trajectory.csv").read_text().splitlines()
    assert lines[0].split(",")[:4] == ["t", "x", "y", "heading"]
    assert len(lines) == 1 + 3001
    assert (d / "events.csv").read_text() == "t,event,x,y\n"
    assert "Direction of Vehicle" in (d / "metrics.txt").read_text()


def test_run_case4_reports_failure(tmp_path, capsys):
    code, _, _ = run(["run", "case4_extreme", "--out", str(tmp_path)], capsys)
    assert code == 2
    events = (tmp_path / "case4_extreme" / "events.csv").read_text()
    assert "collision" in events or "line_cross" in events


def test_zero_duration_rejected(tmp_path, capsys):
    code, _, err = run(["run", "case1_straight", "--duration", "0.0", "--out", str(tmp_path)],
                       capsys)
    assert code == 1 and "--duration" in err
    assert not (tmp_path / "case1_straight").exists()


def test_bad_dt_override_names_scenario(tmp_path, capsys):
    code, _, err = run(["run", "case1_straight", "--dt", "0.2", "--out", str(tmp_path)], capsys)
    assert code == 1 and "case1_straight" in err and "dt" in err


def test_invalid_scenario_file_names_line(tmp_path, capsys):
    f = tmp_path / "bad.toml"
    f.write_text('name = "b"\nbogus = 1\n[path]\nsegments = [{type = "straight", length = 1.0}]\n')
    code, _, err = run(["run", str(f), "--out", str(tmp_path)], capsys)
    assert code == 1 and f"{f}:2" in err


def test_overrides_and_env_out(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    code, out, _ = run(["run", "case1_straight", "--duration", "1.5", "--dt", "0.02"], capsys)
    assert code == 0 and kv(out)["duration_s"] == "1.5"
    lines = (tmp_path / "env" / "case1_straight" / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 1 + 76
    assert lines[2].startswith("0.02,")


def test_outputs_byte_identical(tmp_path, capsys):
    for sub in ("a", "b"):
        run(["run", "case3_angular_noise", "--duration", "5", "--out", str(tmp_path / sub)],
            capsys)
    for name in ("trajectory.csv", "events.csv", "metrics.txt"):
        a = (tmp_path / "a" / "case3_angular_noise" / name).read_bytes()
        b = (tmp_path / "b" / "case3_angular_noise" / name).read_bytes()
        assert a == b


def test_parallel_jobs_match_serial(tmp_path, capsys):
    args = ["run", "case1_straight", "case2_curved", "--duration", "3"]
    assert run(args + ["--out", str(tmp_path / "s")], capsys)[0] == 0
    assert run(args + ["--out", str(tmp_path / "p"), "--jobs", "2"], capsys)[0] == 0
    for name in ("case1_straight", "case2_curved"):
        assert ((tmp_path / "s" / name / "trajectory.csv").read_bytes()
                == (tmp_path / "p" / name / "trajectory.csv").read_bytes())


@pytest.mark.parametrize("where", ["fsync", "replace"])
def test_interrupted_run_writes_nothing(tmp_path, capsys, monkeypatch, where):
    calls = {"n": 0}
    real = getattr(os, where)

    def flaky(*a, **k):
        calls["n"] += 1
        if calls["n"] == 2:
            raise KeyboardInterrupt
        return real(*a, **k)

    # with earlier output present, an interrupted run must leave it untouched
    target = tmp_path / "case1_straight"
    target.mkdir()
    (target / "metrics.txt").write_text("old\n")
    monkeypatch.setattr(os, where, flaky)
    with pytest.raises(KeyboardInterrupt):
        cli.main(["run", "case1_straight", "--duration", "1", "--out", str(tmp_path)])
    monkeypatch.setattr(os, where, real)
    names = sorted(p.name for p in target.iterdir())
    if where == "fsync":
        assert names == ["metrics.txt"]
        assert (target / "metrics.txt").read_text() == "old\n"
    else:
        # the first rename already happened; nothing half-written, no temporaries
        assert not [n for n in names if n.endswith(".tmp")]
        for n in names:
            assert (target / n).read_text().endswith("\n")


# -- calibrate ---------------------------------------------------------------------------------

def test_calibrate_bundled(capsys):
    code, out, _ = run(["calibrate", "bundled"], capsys)
    assert code == 0
    got = kv(out)
    truth = default_camera()
    for name in ("a11", "a12", "a13", "a14", "a21", "a22", "a23", "a24"):
        want = getattr(truth, name)
        assert float(got[name]) == pytest.approx(want, rel=1e-9)
        assert len(got[name].replace("-", "").replace(".", "").lstrip("0")) <= 12
    assert float(got["rms"]) < 1e-9
    assert out.count("\n") >= 8 + 12


def test_calibrate_three_points(capsys):
    code, _, err = run(["calibrate", str(DATA / "three_points.txt")], capsys)
    assert code == 1 and "InsufficientPoints" in err and "three_points.txt" in err


def test_calibrate_coplanar(capsys):
    code, _, err = run(["calibrate", str(DATA / "coplanar_12pt.txt")], capsys)
    assert code == 1 and "DegenerateCalibration" in err and "rank 3" in err


def test_calibrate_parse_error(capsys):
    code, _, err = run(["calibrate", str(DATA / "bad_field.txt")], capsys)
    assert code == 1 and "bad_field.txt:3" in err


# -- fuzzy-eval -------------------------------------------------------------------------------------

def test_fuzzy_eval_zero(capsys):
    code, out, _ = run(["fuzzy-eval", "0", "0", "10", "10", "10", "0.5"], capsys)
    assert code == 0
    v = kv(out)
    assert abs(float(v["steer_bias"])) < 1e-12
    assert v["left_speed"] == v["right_speed"]
    assert v["no_rule_fired.steer_bias"] == "false"


def test_fuzzy_eval_mirrored_pair(capsys):
    a = kv(run(["fuzzy-eval", "0.2", "-0.4", "0.5", "3", "1.2", "0.7"], capsys)[1])
    b = kv(run(["fuzzy-eval", "-0.2", "0.4", "1.2", "3", "0.5", "0.7"], capsys)[1])
    assert float(a["steer_bias"]) == pytest.approx(-float(b["steer_bias"]), abs=1e-9)
    assert float(a["left_speed"]) == pytest.approx(float(b["right_speed"]), abs=1e-9)


def test_fuzzy_eval_unknown_rulebase(tmp_path, capsys):
    code, _, err = run(["fuzzy-eval", "0", "0", "1", "1", "1", "0", "--rulebase",
                        str(tmp_path / "x.toml")], capsys)
    assert code == 1 and "x.toml" in err


# -- plot-data ------------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def case1_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("c1")
    assert cli.main(["run", "case1_straight", "--out", str(out)]) == 0
    return out / "case1_straight"


def test_plot_data(case1_dir, capsys):
    code, _, _ = run(["plot-data", str(case1_dir / "trajectory.csv")], capsys)
    assert code == 0
    rows = len((case1_dir / "trajectory.csv").read_text().splitlines())
    tables = {}
    for name in ("path_xy.csv", "heading_error_t.csv", "wheel_speeds_t.csv"):
        lines = (case1_dir / name).read_text().splitlines()
        assert len(lines) == rows
        assert 2 <= len(lines[0].split(",")) <= 4
        tables[name] = np.loadtxt(case1_dir / name, delimiter=",", skiprows=1)
    assert np.all(np.abs(tables["heading_error_t.csv"][:, 1]) < 2.0)
    xy = tables["path_xy.csv"]
    assert np.allclose(xy[:, 3], 0.0, atol=1e-12)  # the followed line is y = 0
    w = tables["wheel_speeds_t.csv"]
    ratio = w[:, 1].max() / w[-1, 1]
    assert ratio == pytest.approx(1.4, abs=0.02)


def test_plot_data_bad_input(tmp_path, capsys):
    f = tmp_path / "t.csv"
    f.write_text("t,x\n1,2,3\n")
    code, _, err = run(["plot-data", str(f)], capsys)
    assert code == 1 and "t.csv" in err and "line 2" in err
    code, _, err = run(["plot-data", str(tmp_path / "none.csv")], capsys)
    assert code == 1


# -- validate -------------------------------------------------------------------------------------------

def test_validate(tmp_path, capsys):
    from importlib import resources
    rb = resources.files("agvsim.data").joinpath("default_rulebase.toml")
    code, out, _ = run(["validate", "case2_curved", str(rb)], capsys)
    assert code == 0 and out.count(": ok") == 2
    bad = tmp_path / "rb.toml"
    bad.write_text(Path(str(rb)).read_text().replace('"IF speed_ref IS LOW THEN',
                                                     '"IF speed_ref IS SLUGGISH THEN'))
    code, out, _ = run(["validate", str(bad)], capsys)
    assert code == 1 and "SLUGGISH" in out and f"{bad}:" in out


def test_help_documents_precedence():
    r = subprocess.run([sys.executable, "-m", "agvsim.cli", "run", "--help"],
                       capture_output=True, text=True, check=True)
    assert "precedence" in r.stdout and cli.OUT_ENV in r.stdout
