import csv
import json

import numpy as np
import pytest

from exactsme import cli
from exactsme import geometry as geo
from exactsme.config import load_config, parse_config
from exactsme.errors import ConfigError

DEMO = {"plant": {"n": [0, 1], "d": [1, -0.5]}, "x0": [0], "horizon": 2, "measurements": [0, 0]}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def _run(tmp_path, cfg, *extra):
    out = tmp_path / "out"
    code = cli.main(["run", str(_write(tmp_path, cfg)), "--out", str(out), *extra])
    return code, out


def test_first_order_demo_run(tmp_path):
    code, out = _run(tmp_path, DEMO, "--oracle")
    assert code == 0
    steps = [json.loads(line) for line in (out / "steps.jsonl").read_text().splitlines()]
    assert [s["k"] for s in steps] == [1, 2]
    assert sorted(v[0] for v in steps[1]["vertices"]) == [-1.5, 1.5]
    assert steps[1]["oracle"] is not None and steps[1]["defects"] == []
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "ok" and report["defect_count"] == 0


def test_zero_horizon_is_a_config_error(tmp_path, capsys):
    code, _ = _run(tmp_path, {**DEMO, "horizon": 0, "measurements": []})
    assert code == cli.EXIT_CONFIG
    assert "horizon" in capsys.readouterr().err


@pytest.mark.parametrize("patch, field", [
    ({"measurements": [0]}, "measurements"),
    ({"x0": [0, 0]}, "x0"),
    ({"plant": {"n": [1, -0.5], "d": [1, -0.5]}}, "plant"),
    ({"oracle": "maybe"}, "oracle"),
    ({"tolerances": {"bogus": 1}}, "tolerances"),
    ({"colour": "red"}, "unknown"),
])
def test_config_errors_name_the_field(patch, field):
    with pytest.raises(ConfigError, match=field):
        parse_config({**DEMO, **patch})


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "plant": {"n": [0, 1], "d": [1, -0.5]},\n  "x0": [0,]\n}')
    with pytest.raises(ConfigError, match="line 3"):
        load_config(path)


def test_environment_tolerance_override(monkeypatch):
    monkeypatch.setenv("EXACTSME_TOL_GEOM", "1e-11")
    assert parse_config(DEMO).tolerances.geom == 1e-11
    assert parse_config({**DEMO, "tolerances": {"geom": 1e-12}}).tolerances.geom == 1e-12


def test_empty_front_exit_code(tmp_path):
    code, out = _run(tmp_path, {**DEMO, "measurements": [0, 10]})
    assert code == cli.EXIT_EMPTY
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "empty_front" and report["halted_at"] == 2


def test_degenerate_front_exit_code(tmp_path):
    # n_1 = 1 with saturated measurements pins the state to a single point at every step
    cfg = {"plant": {"n": [1, 1], "d": [1, -0.5]}, "x0": [0], "horizon": 2, "measurements": [2, 3.5]}
    code, out = _run(tmp_path, cfg)
    assert code == cli.EXIT_DEGENERATE
    assert json.loads((out / "report.json").read_text())["status"] == "degenerate_front"


def test_defects_are_data_not_failures(tmp_path, monkeypatch):
    real = cli.OracleTracker.__call__

    def widened(self, z_history):
        P = real(self, z_history)
        # an oracle with an extra far vertex forces a completeness defect
        extra = P.vertices.max(axis=0) + 1.0
        return geo.convex_hull(np.vstack([P.vertices, extra]))

    monkeypatch.setattr(cli.OracleTracker, "__call__", widened)
    cfg = {"plant": {"n": [0.4, 1.0, -0.3], "d": [1.0, -0.6, 0.25]}, "x0": [0, 0], "horizon": 4,
           "measurements": {"seed": 3}, "oracle": "on"}
    code, out = _run(tmp_path, cfg)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["defect_count"] > 0


def test_seeded_runs_are_byte_identical(tmp_path):
    cfg = {"plant": {"n": [0.4, 1.0, -0.3], "d": [1.0, -0.6, 0.25]}, "x0": [0, 0], "horizon": 5,
           "measurements": {"seed": 1, "law": "vertex"}}
    path = _write(tmp_path, cfg)
    outs = []
    for name in ("a", "b"):
        assert cli.main(["run", str(path), "--out", str(tmp_path / name), "--oracle"]) == 0
        outs.append((tmp_path / name / "report.json").read_bytes())
    assert outs[0] == outs[1]
    assert cli.main(["run", str(path), "--out", str(tmp_path / "c"), "--seed", "2"]) == 0
    assert (tmp_path / "c" / "report.json").read_bytes() != outs[0]
    report = json.loads(outs[0])
    assert all(s["true_state_inside"] for s in report["steps"])


def test_seed_override_needs_seeded_measurements(tmp_path):
    code, _ = _run(tmp_path, DEMO, "--seed", "4")
    assert code == cli.EXIT_CONFIG


def test_floats_use_seventeen_digits():
    assert cli.dumps17({"a": 0.1, "b": [1, True, None]}) == '{"a":0.10000000000000001,"b":[1,true,null]}'
    assert json.loads(cli.dumps17({"x": 1 / 3}))["x"] == 1 / 3


def _csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_export_first_order_run(tmp_path):
    code, out = _run(tmp_path, DEMO)
    cli.main(["export-plot", str(out / "report.json"), "--out", str(tmp_path / "plot")])
    rows = _csv(tmp_path / "plot" / "plot.csv")
    assert tuple(rows[0]) == cli.CSV_COLUMNS
    segments = {r[0] for r in rows[1:] if r[1] == "vertex"}
    assert segments == {"1", "2"}
    assert all(sum(1 for r in rows[1:] if r[1] == "vertex" and r[0] == s) == 2 for s in segments)


def test_export_empty_report(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    cli.main(["export-plot", str(empty), "--out", str(tmp_path / "plot")])
    assert _csv(tmp_path / "plot" / "plot.csv") == [list(cli.CSV_COLUMNS)]


def test_export_closes_planar_loops(tmp_path):
    cfg = {"plant": {"n": [0.4, 1.0, -0.3], "d": [1.0, -0.6, 0.25]}, "x0": [0, 0], "horizon": 3,
           "measurements": {"seed": 5}}
    code, out = _run(tmp_path, cfg)
    assert code == 0
    cli.main(["export-plot", str(out / "report.json"), "--out", str(tmp_path / "plot")])
    rows = _csv(tmp_path / "plot" / "plot.csv")[1:]
    for step in {r[0] for r in rows}:
        loop = [r for r in rows if r[0] == step and r[1] == "vertex"]
        if len(loop) > 3:
            assert loop[0][3:5] == loop[-1][3:5]
