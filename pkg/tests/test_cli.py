import io
import json
import subprocess
import sys

import pytest
from PIL import Image

from merodyn import csvio
from merodyn.cli import FIGURES, compute, run
from merodyn.julia_render import read_outcomes_csv


def call(tmp_path, *argv, name="out"):
    out = tmp_path / name
    rc = run([*argv, "--out", str(out)])
    return rc, out


def header(path):
    with open(path, "rb") as fh:
        first = fh.readline().decode()
        if first == "P6\n":
            first = fh.readline().decode()
    assert first.startswith(csvio.MAGIC)
    return json.loads(first[len(csvio.MAGIC):])


def test_fixed_points_csv(tmp_path):
    rc, out = call(tmp_path, "fixed-points", "--lambda", "2")
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "location,stability,multiplier,is_origin"
    assert lines[2].startswith("0,repelling,2,")
    assert lines[3].startswith("0.3748225281836")
    assert ",attracting," in lines[3]


@pytest.mark.parametrize("argv", [
    ["fixed-points", "--lambda", "0.5"],
    ["cycles", "--lambda", "12", "--interval", "0.01,6"],
    ["classify", "--lambda", "1.1", "--seeds", "-0.8,0.3,0.0"],
    ["classify", "--lambda", "12", "--seed-rule", "value:1.6"],
    ["lyapunov", "--lambda-range", "10,45", "--steps", "12", "--k", "500"],
    ["lyapunov", "--lambda", "20", "--seed-rule", "value:-0.999999999"],
    ["cobweb", "--lambda", "star", "--n", "30", "--seed-rule", "value:0.5"],
    ["bifurcation", "--lambda-range", "0.2,15", "--steps", "9", "--samples", "4"],
])
def test_csv_round_trip(tmp_path, argv):
    rc, out = call(tmp_path, *argv)
    assert rc == 0
    config, records = csvio.read_records(io.StringIO(out.read_text()))
    cmd = config.pop("command")
    assert cmd == argv[0]
    config = {k: tuple(v) if isinstance(v, list) else v for k, v in config.items()}
    assert records == compute(cmd, config)


def test_csv_locale_free_format(tmp_path):
    rc, out = call(tmp_path, "cycles", "--lambda", "12")
    raw = out.read_bytes()
    assert b"\r" not in raw
    assert b"0.74821822258854" in raw


def test_text_format(tmp_path):
    rc, out = call(tmp_path, "fixed-points", "--lambda", "2", "--format", "text")
    assert rc == 0
    assert "FixedPointRecord" in out.read_text()


def test_julia_ppm_and_csv(tmp_path):
    argv = ["julia", "--lambda", "9.94", "--window", "-1,1,-1,1", "--n", "50",
            "--width", "24", "--height", "16"]
    rc, ppm = call(tmp_path, *argv, name="j.ppm")
    assert rc == 0
    assert header(ppm)["n"] == 50
    data = ppm.read_bytes()
    assert data.startswith(b"P6\n# merodyn {")
    assert Image.open(ppm).size == (24, 16)
    rc, csv_out = call(tmp_path, *argv, "--format", "csv", name="j.csv")
    conf = header(csv_out)
    assert conf["lam"] == 9.94 and conf["window"] == [-1.0, 1.0, -1.0, 1.0]
    with open(csv_out) as fh:
        img = read_outcomes_csv(fh, 50)
    assert (img.width, img.height) == (24, 16)


def test_workers_do_not_change_output(tmp_path):
    base = ["julia", "--lambda", "1.1", "--width", "30", "--height", "20", "--n", "80"]
    _, a = call(tmp_path, "--workers", "1", *base, name="a")
    _, b = call(tmp_path, "--workers", "5", *base, name="b")
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["julia", "--lambda", "0"],
    ["julia", "--lambda", "-3"],
    ["julia", "--lambda", "abc"],
    ["julia", "--lambda", "1", "--window", "1,-1,-1,1"],
    ["julia", "--lambda", "1", "--window", "1,2,3"],
    ["cycles", "--lambda", "12", "--interval", "-2,0"],
    ["cycles", "--lambda", "12", "--period", "1"],
    ["lyapunov", "--lambda", "12", "--k", "10"],
    ["lyapunov"],
    ["lyapunov", "--lambda", "2", "--lambda-range", "1,3"],
    ["bifurcation"],
    ["cobweb", "--lambda", "1", "--seed-rule", "value:-1"],
    ["cobweb", "--lambda", "1", "--seed-rule", "banana"],
    ["cycles", "--figure", "2"],
    ["cobweb", "--figure", "2", "--panel", "3"],
    ["fixed-points", "--lambda", "2", "--tol", "1e-300"],
    ["nonsense"],
])
def test_validation_exit_code(tmp_path, argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = run(argv + ["--out", str(tmp_path / "x")])
        raise SystemExit(code)
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "error" in err


def test_usage_error_names_flag(capsys):
    with pytest.raises(SystemExit):
        run(["julia", "--lambda", "0"])
    err = capsys.readouterr().err
    assert "--lambda" in err and "> 0" in err


def test_workers_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MERODYN_WORKERS", "zero")
    rc, _ = call(tmp_path, "fixed-points", "--lambda", "2")
    assert rc == 2 and "MERODYN_WORKERS" in capsys.readouterr().err
    monkeypatch.setenv("MERODYN_WORKERS", "3")
    rc, out = call(tmp_path, "bifurcation", "--lambda-range", "1,2", "--steps", "3")
    assert rc == 0


def test_runtime_error_exit_code(tmp_path, capsys):
    rc = run(["fixed-points", "--lambda", "2", "--out", str(tmp_path / "no" / "dir.csv")])
    assert rc == 1


@pytest.mark.parametrize("figure, panel", [
    (f, p + 1) for f, (_, panels) in sorted(FIGURES.items()) for p in range(len(panels))
])
def test_presets_deterministic(tmp_path, figure, panel):
    cmd = FIGURES[figure][0]
    extra = ["--width", "40", "--height", "40"] if cmd == "julia" else []
    argv = [cmd, "--figure", str(figure), "--panel", str(panel), *extra]
    rc1, a = call(tmp_path, *argv, name="a")
    rc2, b = call(tmp_path, *argv, name="b")
    assert rc1 == rc2 == 0
    assert a.read_bytes() == b.read_bytes()
    conf = header(a)
    assert conf["figure"] == figure
    for key, value in FIGURES[figure][1][panel - 1].items():
        if key != "lam" and key not in ("width", "height"):
            assert conf[key] == (list(value) if isinstance(value, tuple) else value)


def test_preset_overridden_by_flag(tmp_path):
    _, out = call(tmp_path, "cobweb", "--figure", "3", "--n", "4")
    conf = header(out)
    assert conf["n"] == 4 and conf["lam"] == 1.0


def test_lambda_star_preset(tmp_path):
    _, out = call(tmp_path, "cobweb", "--figure", "5", "--panel", "1", "--n", "2")
    assert header(out)["lam"] == 9.930264849894014


def test_console_script_stdout():
    proc = subprocess.run([sys.executable, "-m", "merodyn.cli", "fixed-points", "--lambda", "0.5"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[3].startswith("-0.3149230578454")
    assert proc.stderr == ""
