import csv
import json

import numpy as np
import pytest
import yaml

from gpecho import runner
from gpecho.cli import main
from gpecho.config import parse_config
from gpecho.errors import NumericalError


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "fig4-halftime" in out and "fig1-500" in out


def test_run_preset_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--scenario", "fig4-none", "--out", str(out)]) == 0
    assert "echo 1:" in capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["backend"] in ("numba", "numpy")
    rows = read_csv(out / "metrics.csv")
    assert rows[0]["m"] == "1"
    assert float(rows[0]["R_m"]) == pytest.approx(0.465, abs=0.015)
    records = sorted(p.name for p in (out / "records").iterdir())
    assert records == ["input.csv"] + [f"target{n}_out.csv" for n in range(1, 6)]
    rows = read_csv(out / "spectrum.csv")
    assert float(rows[0]["omega_gamma0"]) == pytest.approx(-600.0)
    assert set(manifest["outputs"]) >= {"metrics.csv", "spectrum.csv", "records/input.csv"}


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--scenario", "fig4-invert", "--out", str(d), "--format", "json"]) == 0
    ma = json.loads((a / "manifest.json").read_text())["outputs"]
    mb = json.loads((b / "manifest.json").read_text())["outputs"]
    assert ma == mb
    assert "metrics.json" in ma
    for name in ma:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_manifest_config_reproduces_run(tmp_path):
    out = tmp_path / "first"
    assert main(["run", "--scenario", "fig4-halftime", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    cfg = dict(manifest["config"], output={"dir": str(tmp_path / "second")})
    again = runner.run(parse_config(cfg))
    assert again.outputs == manifest["outputs"]


def test_inline_config(tmp_path):
    cfg = {
        "inline": {
            "name": "one-target",
            "targets": [{"z": 0.0, "thickness": 1e-3, "xi": 10.0, "n_x": 8}],
            "protocol": {"segments": [{"time": 60.0, "angle": 1.0}]},
            "pulse": {"t0": 30.0, "tau_s": 10.0},
            "grid": {"t_end": 150.0, "dt": 0.05},
            "analyses": ["records", "spectrum"],
        },
        "output": {"dir": str(tmp_path / "inline")},
    }
    assert main(["run", "--config", write_yaml(tmp_path / "c.yaml", cfg)]) == 0
    theta = np.array([float(r["theta"]) for r in read_csv(tmp_path / "inline/records/input.csv")])
    assert theta[0] == 0.0 and theta[-1] == pytest.approx(np.pi)


def test_zero_amplitude_exits_no_echo(tmp_path, capsys):
    out = tmp_path / "zero"
    cfg = {"scenario": "fig4-none", "overrides": {"amplitude": 0.0}, "output": {"dir": str(out)}}
    assert main(["run", "--config", write_yaml(tmp_path / "z.yaml", cfg)]) == 4
    assert "no echo found" in capsys.readouterr().err
    for path in (out / "records").iterdir():
        rows = read_csv(path)
        assert all(float(r["abs2_omega"]) == 0.0 for r in rows)
    assert json.loads((out / "manifest.json").read_text())["status"] == "no-echo-found"


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = {"scenario": "fig4-none", "overrides": {"nx": 8}}
    assert main(["run", "--config", write_yaml(tmp_path / "bad.yaml", cfg)]) == 2
    assert "overrides.nx" in capsys.readouterr().err


def test_coarse_dt_exits_2(tmp_path, capsys):
    cfg = {"scenario": "fig4-none", "overrides": {"dt": 0.5}, "output": {"dir": str(tmp_path)}}
    assert main(["run", "--config", write_yaml(tmp_path / "dt.yaml", cfg)]) == 2
    assert "dt" in capsys.readouterr().err


def test_numerical_error_exits_3(tmp_path, monkeypatch, capsys):
    def boom(self, **kw):
        raise NumericalError("non-finite polarization at t=1 s, node 0")

    monkeypatch.setattr("gpecho.scenarios.Scenario.simulate", boom)
    assert main(["run", "--scenario", "fig4-none", "--out", str(tmp_path)]) == 3
    assert "non-finite" in capsys.readouterr().err


def test_sweep_spacing(tmp_path):
    cfg = {"scenario": "fig4-none", "sweep": {"spacing": [0.04, 0.08, 0.16]},
           "output": {"dir": str(tmp_path / "sw")}}
    assert main(["sweep", "--config", write_yaml(tmp_path / "s.yaml", cfg)]) == 0
    rows = read_csv(tmp_path / "sw/summary.csv")
    assert [r["spacing"] for r in rows] == ["0.04", "0.08", "0.16"]
    assert all(r["status"] == "ok" for r in rows)
    tau = {r["spacing"]: float(r["tau_1"]) for r in rows}
    assert tau["0.08"] / tau["0.16"] == pytest.approx(2.0, abs=0.15)
    assert (tmp_path / "sw/point_002/metrics.csv").exists()
    assert len(json.loads((tmp_path / "sw/summary.json").read_text())) == 3


def test_sweep_conventions_with_workers(tmp_path):
    cfg = {"scenario": "fig4-none", "sweep": {"convention": ["paper-numbers", "ln2-literal"]},
           "workers": 2, "output": {"dir": str(tmp_path / "conv")}}
    assert main(["sweep", "--config", write_yaml(tmp_path / "c.yaml", cfg)]) == 0
    r1 = {r["convention"]: float(r["R_1"]) for r in read_csv(tmp_path / "conv/summary.csv")}
    assert r1["paper-numbers"] == pytest.approx(0.4644, abs=0.015)
    assert abs(r1["ln2-literal"] - 0.4644) > 0.015


def test_single_point_sweep_matches_run(tmp_path):
    cfg = {"scenario": "fig4-freeze_retrieve", "sweep": {"dt": [0.02]},
           "output": {"dir": str(tmp_path / "one")}}
    rows = runner.sweep(parse_config(cfg))
    plain = runner.run(parse_config({"scenario": "fig4-freeze_retrieve",
                                     "overrides": {"dt": 0.02},
                                     "output": {"dir": str(tmp_path / "plain")}}))
    assert rows[0]["R_1"] == plain.metrics[0]["R_m"]
    assert rows[0]["F_1"] == plain.metrics[0]["F_m"]
    point = json.loads((tmp_path / "one/point_000/manifest.json").read_text())
    assert point["outputs"] == plain.outputs


def test_sweep_without_grid_exits_2(tmp_path):
    assert main(["sweep", "--scenario", "fig4-none", "--out", str(tmp_path)]) == 2


def test_sweep_reports_bad_point(tmp_path):
    cfg = parse_config({"scenario": "fig4-none", "sweep": {"dt": [0.02, 0.5]},
                        "output": {"dir": str(tmp_path / "mixed")}})
    rows = runner.sweep(cfg)
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"] == "ConfigError" and "dt" in rows[1]["error"]
