import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from forced_burgers import cli
from forced_burgers.grid import from_csv

LAX = {"spec": {"preset": "free"}, "grid": {"n": 512, "m": 64},
       "initial": {"constant": 0.3, "fourier": [[1, 0.0, 0.5]]}, "evolve": {"periods": 20}}
FREE_ALPHA = {"spec": {"kind": "separable_forced", "potential": []}, "grid": {"n": 256, "m": 32},
              "alpha_curve": {"c": [0.0, 0.3, 1.0], "n_periods": 16, "rho_periods": 32}}
NWAVE = {"spec": {"preset": "free"}, "grid": {"m": 64}, "initial": {"fourier": [[1, 0.0, 1.0]]},
         "oracle_compare": {"n": [256, 512, 1024]}}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), np.array([[float(v) if v else np.nan for v in ln.split(",")] for ln in lines[1:]])


def test_evolve_lax_case(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["evolve", str(write(tmp_path, LAX)), str(out)]) == 0
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert len(snaps) == 20
    dist = [np.mean(np.abs(from_csv(p.read_text()).values - 0.3)) for p in snaps]
    assert dist[-1] <= 0.02 and all(b <= a + 1e-12 for a, b in zip(dist[1:], dist[2:]))


def test_alpha_curve_free(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["alpha-curve", "--config", str(write(tmp_path, FREE_ALPHA)), "--out", str(out)]) == 0
    header, rows = read_csv(out / "alpha_curve.csv")
    assert header == ["c", "alpha", "rho", "T"]
    assert np.allclose(rows[:, 1], rows[:, 0] ** 2 / 2, atol=1e-3)
    assert np.allclose(rows[:, 2], rows[:, 0], atol=2e-3)


def test_alpha_curve_parallel_is_identical(tmp_path):
    cfgp = write(tmp_path, FREE_ALPHA)
    assert cli.main(["alpha-curve", str(cfgp), str(tmp_path / "a")]) == 0
    assert cli.main(["alpha-curve", str(cfgp), str(tmp_path / "b"), "--jobs", "3"]) == 0
    assert (tmp_path / "a" / "alpha_curve.csv").read_bytes() == (tmp_path / "b" / "alpha_curve.csv").read_bytes()


def test_oracle_compare_gap_halves(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["oracle-compare", str(write(tmp_path, NWAVE)), str(out)]) == 0
    _, rows = read_csv(out / "oracle_compare.csv")
    gaps = rows[:, 1]
    assert gaps[0] <= 5e-2 and gaps[1] <= 0.6 * gaps[0] and gaps[2] <= 0.6 * gaps[1]


def test_period_graphs_and_corollary(tmp_path):
    cfg = {"spec": {"preset": "forced_pendulum"}, "grid": {"n": 256, "m": 32},
           "initial": {"fourier": [[1, 0.0, 0.5]]}, "period": {"n_max": 32, "tol": 1e-3, "c_scan": [0.0, 0.2]},
           "graphs": {"periods": 2}, "corollary": {"n_list": [1, 2, 4]}}
    path = write(tmp_path, cfg)
    for cmd in ("period", "graphs", "corollary"):
        assert cli.main([cmd, str(path), str(tmp_path / cmd)]) == 0
    rep = json.loads((tmp_path / "period" / "period_report.json").read_text())
    assert rep["detected_T"] == 1 and rep["residual"] <= 1e-3
    header, rows = read_csv(tmp_path / "period" / "period_scan.csv")
    assert header == ["c", "rho", "T_of_c", "detected_T"] and np.allclose(rows[:, 0], [0.0, 0.2])
    header, rows = read_csv(tmp_path / "graphs" / "inclusion_defect.csv")
    assert header == ["n", "defect"] and np.all(rows[:, 1] <= 5 / 256)
    assert (tmp_path / "graphs" / "graph_0002.csv").read_text().startswith("x,p,segment_id\n")
    cor = json.loads((tmp_path / "corollary" / "corollary.json").read_text())
    assert cor["n"] == [1, 2, 4]


def test_outputs_are_deterministic_and_declared(tmp_path):
    cfg = dict(LAX, initial={"random": {"modes": 3, "amplitude": 0.4}}, grid={"n": 128, "m": 16},
               evolve={"periods": 3})
    path = write(tmp_path, cfg)
    for name in ("a", "b"):
        assert cli.main(["evolve", str(path), str(tmp_path / name), "--seed", "7"]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config_sha256"] == hashlib.sha256(path.read_bytes()).hexdigest()
    assert manifest["seed"] == 7
    assert sorted(manifest["files"]) == [f for f in files if f != "manifest.json"]
    for f, digest in manifest["files"].items():
        assert hashlib.sha256((tmp_path / "a" / f).read_bytes()).hexdigest() == digest
    # a different seed gives different random data
    assert cli.main(["evolve", str(path), str(tmp_path / "c"), "--seed", "8"]) == 0
    assert (tmp_path / "c" / "snapshot_0001.csv").read_bytes() != (tmp_path / "a" / "snapshot_0001.csv").read_bytes()


def test_csv_format(tmp_path):
    cfg = dict(LAX, grid={"n": 64, "m": 16}, evolve={"periods": 1})
    assert cli.main(["evolve", str(write(tmp_path, cfg)), str(tmp_path / "o")]) == 0
    raw = (tmp_path / "o" / "snapshot_0001.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    value = raw.splitlines()[2].split(b",")[1]
    assert float(value) == float(repr(float(value)))


@pytest.mark.parametrize("cfg, field", [
    ({"grid": {"n": 500}}, "grid.n"),
    ({"spec": {"preset": "nope"}}, "spec.preset"),
    ({"spec": {"potential": [[1, 0, "a", 0]]}}, "spec.potential[0]"),
    ({"evolve": {"periods": 0}}, "evolve.periods"),
    ({"initial": {"random": {"amplitude": -1}}}, "initial.random.amplitude"),
    ({"initial": {"fourier": [[1, 2]]}}, "initial.fourier[0]"),
])
def test_config_errors_exit_1(tmp_path, capsys, cfg, field):
    assert cli.main(["evolve", str(write(tmp_path, cfg)), str(tmp_path / "o")]) == 1
    assert f"{field}:" in capsys.readouterr().err


def test_invalid_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "grid": \n')
    assert cli.main(["evolve", str(path), str(tmp_path / "o")]) == 1
    assert "line" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert cli.main(["evolve", str(tmp_path / "none.json"), str(tmp_path / "o")]) == 1
    assert "config:" in capsys.readouterr().err


def test_no_period_exits_2(tmp_path):
    cfg = {"spec": {"preset": "free"}, "grid": {"n": 128, "m": 16},
           "initial": {"constant": 0.3, "fourier": [[1, 0.0, 0.5]]}, "period": {"n_max": 32, "tol": 1e-12}}
    out = tmp_path / "o"
    assert cli.main(["period", str(write(tmp_path, cfg)), str(out)]) == 2
    assert json.loads((out / "period_report.json").read_text())["detected_T"] is None
    assert (out / "manifest.json").exists()


def test_console_entry_point(tmp_path):
    path = write(tmp_path, dict(LAX, grid={"n": 64, "m": 16}, evolve={"periods": 1}))
    res = subprocess.run([sys.executable, "-m", "forced_burgers.cli", "evolve", "--config", str(path),
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run([sys.executable, "-m", "forced_burgers.cli", "evolve"], capture_output=True, text=True)
    assert res.returncode == 1
