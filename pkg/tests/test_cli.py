import json
import subprocess
import sys

import pytest

from canards.cli import main


def write_config(tmp_path, name, **params):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps({"circuit": name, "params": params}))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fit(capsys):
    code, out, _ = run(capsys, "fit", "--a", "-2", "--b", "4", "--d", "3")
    r = json.loads(out)
    assert code == 0 and r["schema"] == 1
    assert abs(r["c1"] - 0.384088) < 1e-6 and abs(r["c2"] + 0.962963) < 1e-6
    code, out, _ = run(capsys, "fit", "--a", "1", "--b", "1", "--d", "2")
    r = json.loads(out)
    assert r["c1"] == 0 and r["c2"] == 1


def test_fit_precondition_exit_code(capsys):
    code, _, err = run(capsys, "fit", "--a", "-2", "--b", "4", "--d", "0.5")
    assert code == 2 and "d must exceed 1" in err


def test_analyze_3d_duck(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic", gamma=0.3275)
    code, out, _ = run(capsys, "analyze", "--config", cfg, "--out", str(tmp_path / "o"))
    r = json.loads(out)
    assert code == 0
    assert r["verdict"]["canard_exists"] is True
    assert r["cubic_fit"]["c1"] == pytest.approx(280 / 729)
    assert len(r["pseudo_singularities"]) == 2
    for p in r["pseudo_singularities"]:
        assert p["sigma"]["kind"] == "folded-saddle" and p["genericity"]["all_pass"]
        assert abs(p["identity_residuals"]["sigma2_minus_2a"]) < 1e-9
    assert r["canard_window"]["hopf_value"] == pytest.approx(0.274, abs=0.005)
    assert (tmp_path / "o" / "analysis.json").read_text() == out


def test_analyze_below_saddle_node(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic")
    code, out, _ = run(capsys, "analyze", "--config", cfg, "--duck", "-0.5")
    r = json.loads(out)
    assert code == 0 and r["duck_parameter"]["value"] == -0.5
    assert r["verdict"] == {**r["verdict"], "canard_exists": False, "folded_saddle": False}


def test_analyze_4d(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua4d_cubic", alpha2=0.1)
    code, out, _ = run(capsys, "analyze", "--config", cfg, "--free-value", "0")
    r = json.loads(out)
    assert code == 0 and r["verdict"]["canard_exists"] is True
    assert r["cubic_fit"] is None
    assert r["pseudo_singularities"][0]["free_index"] == 1
    assert len(r["fixed_points"]) == 1
    assert r["fixed_points"][0]["routh_hurwitz"]["stable"] is False


def test_global_flags_before_and_after_subcommand(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic")
    _, out_a, _ = run(capsys, "--seed", "7", "--config", cfg, "analyze")
    _, out_b, _ = run(capsys, "analyze", "--seed", "7", "--config", cfg)
    assert json.loads(out_a)["seed"] == 7
    assert out_a == out_b


def test_config_errors(tmp_path, capsys):
    assert run(capsys, "analyze")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "analyze", "--config", str(bad))[0] == 2
    cfg = write_config(tmp_path, "chua3d_cubic", omega=1.0)
    assert run(capsys, "analyze", "--config", cfg)[0] == 2
    cfg = write_config(tmp_path, "chua3d_pwl")
    assert run(capsys, "analyze", "--config", cfg)[0] == 2
    assert run(capsys, "analyze", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_solver_failure_exit_code(tmp_path, capsys):
    # with a small beta the tracked fixed point does not exist at the lower Hopf bracket end
    cfg = write_config(tmp_path, "chua3d_cubic", beta=0.05)
    code, out, _ = run(capsys, "analyze", "--config", cfg)
    r = json.loads(out)
    assert code == 3 and r["failures"] and r["canard_window"] is None
    assert r["pseudo_singularities"] and r["verdict"]["canard_exists"] is False


def test_sweep_3d(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic")
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--range", "-0.3", "1", "--steps", "66")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "parameter,D1,D2,sigma2,stable" and len(lines) == 67
    rows = [line.split(",") for line in lines[1:]]
    flips = [float(b[0]) for a, b in zip(rows, rows[1:])
             if float(a[0]) > 0 and (float(a[2]) > 0) != (float(b[2]) > 0)]
    assert len(flips) == 1 and abs(flips[0] - 0.274) < 0.03


def test_sweep_particular(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_particular")
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--range", "0", "0.5", "--steps", "51")
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    for r in rows:
        a = float(r[0])
        if 0 < a < 0.2:
            assert float(r[1]) > 0 and float(r[2]) > 0 and r[4] == "true"
        if a > 0.21:
            assert r[4] == "false"


def test_sweep_zero_length_and_4d(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic")
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--range", "0.3", "0.3")
    assert code == 0 and len(out.strip().splitlines()) == 2
    cfg = write_config(tmp_path, "chua4d_cubic")
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--range", "0.1", "0.2", "--steps", "3")
    assert out.splitlines()[0] == "parameter,D1,D2,D3,sigma2,stable"
    assert run(capsys, "sweep", "--config", cfg, "--range", "0", "1", "--steps", "0")[0] == 2
    assert run(capsys, "sweep", "--config", cfg, "--range", "0", "1",
               "--parameter", "gamma")[0] == 2


def test_simulate_3d(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic")
    out_dir = tmp_path / "sim"
    code, out, _ = run(capsys, "simulate", "--config", cfg, "--out", str(out_dir))
    r = json.loads(out)
    assert code == 0 and r["canard"]["repelling_time"] >= 0.1
    assert (out_dir / "canard.json").read_text() == out
    assert r["files"] == ["manifold.csv", "pseudo_singular.csv", "trajectory.csv"]
    assert (out_dir / "trajectory.csv").read_text().startswith("t,x1,x2,y1\n")


def test_simulate_4d_projections(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua4d_cubic", alpha2=0.1)
    code, out, _ = run(capsys, "simulate", "--config", cfg, "--out", str(tmp_path / "s"),
                       "--t-final", "20")
    files = json.loads(out)["files"]
    assert code == 0
    for name in ("trajectory_x1_x3_y1.csv", "trajectory_x1_y1.csv", "manifold_x1_x3_y1.csv"):
        assert name in files


def test_simulate_zero_time_and_errors(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic")
    code, out, _ = run(capsys, "simulate", "--config", cfg, "--out", str(tmp_path / "z"),
                       "--t-final", "0")
    r = json.loads(out)
    assert code == 0 and r["samples"] == 0 and "trajectory.csv" not in r["files"]
    assert run(capsys, "simulate", "--config", cfg)[0] == 2
    assert run(capsys, "simulate", "--config", cfg, "--out", str(tmp_path / "n"),
               "--t-final", "-1")[0] == 2
    assert run(capsys, "simulate", "--config", cfg, "--out", str(tmp_path / "n"),
               "--initial", "1", "2")[0] == 2
    pwl = write_config(tmp_path, "chua3d_pwl")
    assert run(capsys, "simulate", "--config", pwl, "--out", str(tmp_path / "p"))[0] == 2
    code, out, _ = run(capsys, "simulate", "--config", pwl, "--out", str(tmp_path / "p"),
                       "--t-final", "1", "--initial", "0.1", "0.1", "0.1")
    assert code == 0 and json.loads(out)["samples"] > 0


def test_region(capsys):
    code, out, _ = run(capsys, "region", "--probe", "0", "0.9", "--probe", "0", "1.2",
                       "--probe", "10", "0.9", "--probe", "0", "0.93191916850199")
    r = json.loads(out)
    assert code == 0
    assert [p["membership"] for p in r["probes"]] == ["inside", "outside", "outside", "boundary"]
    assert r["alpha2_intercept"] == pytest.approx(0.9319, abs=1e-3)
    assert run(capsys, "region", "--c1", "-1", "--c2", "-0.5")[0] == 2


def test_determinism(tmp_path, capsys):
    cfg = write_config(tmp_path, "chua3d_cubic")
    outs = [run(capsys, "sweep", "--config", cfg, "--range", "0", "0.5", "--steps", "6")[1]
            for _ in range(2)]
    assert outs[0] == outs[1]
    outs = [run(capsys, "analyze", "--config", cfg)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "canards", "fit", "--a", "-2", "--b", "4",
                           "--d", "3"], capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["c2"] == pytest.approx(-26 / 27)
