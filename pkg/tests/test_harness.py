import csv
import json
import math

import numpy as np
import pytest

from quasiwave import cli
from quasiwave.diagnostics import DiagnosticsRecord, Outcome
from quasiwave.errors import ParseError, ValidationError
from quasiwave.harness import (builtin_scenario_path, config_from_dict, cross_validate, load_scenario,
                               run, sweep, write_report, write_sweep)

MINIMAL = {"model": {"kind": "constant", "c0": 1.0}, "u0": {"kind": "zero"}, "u1": {"kind": "zero"}}


def small_thm1(mass=0.375, t_end=1.0):
    return {
        "model": {"kind": "zabusky", "a": 2.0},
        "u0": {"kind": "zero"},
        "u1": {"kind": "bump", "integral": -mass, "radius": 1.0},
        "grid": {"x_half_width": 3.0, "n": 400},
        "run": {"t_end": t_end, "order": 2},
    }


def test_minimal_config_defaults():
    cfg = config_from_dict(MINIMAL)
    assert cfg.run["cfl"] == 0.45 and cfg.run["record_stride"] == 10
    assert cfg.run["solver"] == "riemann" and cfg.run["order"] == 1
    assert cfg.grid["n"] == 1024
    assert cfg.warnings  # half width was auto-sized


def test_auto_sizing():
    raw = dict(small_thm1(), grid={"dx": 0.01}, run={"t_end": 2.0})
    cfg = config_from_dict(raw)
    assert cfg.grid["x_half_width"] >= 1.0 + 2.0 + 10 * 0.01 - 1e-12
    assert any("auto-sized" in w for w in cfg.warnings)
    raw["grid"] = {"x_half_width": 1.5, "dx": 0.01}
    cfg = config_from_dict(raw)
    assert cfg.grid["dx"] == 0.01 and cfg.grid["x_half_width"] >= 3.1 - 1e-12
    assert any("expanded" in w for w in cfg.warnings)


@pytest.mark.parametrize("patch,field", [
    ({"model": {"kind": "zabusky", "a": 0.0}}, "model.a"),
    ({"model": {"kind": "zabusky", "a": -2.0}}, "model.a"),
    ({"model": {"kind": "warp"}}, "model.kind"),
    ({"model": {"kind": "expression", "expr": "1 + q"}}, "model.expr"),
    ({"u1": {"kind": "bump", "radius": -1.0}}, "u1.radius"),
    ({"u0": {"kind": "spline"}}, "u0.kind"),
    ({"run": {"cfl": 1.2}}, "run.cfl"),
    ({"run": {"solver": "spectral"}}, "run.solver"),
    ({"run": {"t_end": "soon"}}, "run.t_end"),
    ({"run": {"bogus": 1}}, "run.bogus"),
    ({"grid": {"n": 8}}, "grid.n"),
])
def test_validation_errors_name_field(patch, field):
    raw = dict(MINIMAL, **patch)
    with pytest.raises(ValidationError) as info:
        config_from_dict(raw)
    assert info.value.field == field


def test_parse_error_has_location(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[model\nkind = 1\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_scenario(p)
    assert str(p) in info.value.location
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "missing.toml")


def test_builtin_scenarios_load():
    for name in ("theorem1", "theorem2", "theorem3", "dalembert"):
        assert builtin_scenario_path(name).exists()
        cfg = load_scenario(name)
        assert not cfg.warnings


def test_hash_changes_with_any_field():
    base = config_from_dict(small_thm1())
    h = base.config_hash()
    for key, value in [("run.cfl", 0.4), ("u1.radius", 1.1), ("grid.n", 402), ("model.a", 2.5),
                       ("run.record_stride", 5), ("output.stem", "x")]:
        assert base.with_overrides({key: value}).config_hash() != h
    assert base.with_overrides({}).config_hash() == h


def test_run_report_contents():
    rep = run(config_from_dict(small_thm1()))
    assert rep.series and rep.series[0].t == 0.0 and rep.series[-1].t == pytest.approx(1.0)
    assert rep.classification.outcome is Outcome.GLOBAL_WINDOW
    assert rep.bounds["theta1_floor"] == pytest.approx(-0.5, abs=1e-8)
    assert rep.bounds["degeneracy_time_bound"] is None
    prov = rep.provenance
    assert {"config_hash", "grid", "thresholds", "solver", "version"} <= set(prov)
    json.dumps(rep.to_dict())


def test_run_is_deterministic():
    cfg = config_from_dict(small_thm1())
    a, b = run(cfg), run(cfg)
    assert [r.csv_row() for r in a.series] == [r.csv_row() for r in b.series]


def test_failures_become_inconclusive(monkeypatch):
    from quasiwave import harness
    from quasiwave.errors import DomainError

    def broken(*args, **kwargs):
        raise DomainError("injected")

    monkeypatch.setattr(harness, "step", broken)
    monkeypatch.setattr(harness, "step_flux", broken)
    for solver in ("riemann", "flux"):
        rep = run(config_from_dict(small_thm1()), solver)
        assert rep.classification.outcome is Outcome.INCONCLUSIVE
        assert "injected" in rep.classification.reason


def test_write_report(tmp_path):
    rep = run(config_from_dict(small_thm1(t_end=0.3)))
    meta, series = write_report(rep, tmp_path, "demo")
    data = json.loads(meta.read_text())
    assert data["classification"]["outcome"] == "GLOBAL_WINDOW"
    rows = list(csv.reader(series.open()))
    assert tuple(rows[0]) == DiagnosticsRecord.CSV_HEADER
    assert len(rows) == len(rep.series) + 1
    for field, value in zip(rows[1], rep.series[0].csv_row()):
        assert float(field) == value


def test_sweep_empty_axes():
    rows = sweep(config_from_dict(small_thm1(t_end=0.2)), {})
    assert len(rows) == 1 and rows[0]["params"] == {}


def test_sweep_order_independent_of_workers(tmp_path):
    cfg = config_from_dict(small_thm1(t_end=0.2))
    axes = {"u1.integral": [-0.1, -0.3], "model.a": [1.0, 2.0]}
    serial = sweep(cfg, axes, jobs=1)
    parallel = sweep(cfg, axes, jobs=2)
    assert serial == parallel
    assert [r["params"] for r in serial] == [
        {"u1.integral": -0.1, "model.a": 1.0}, {"u1.integral": -0.1, "model.a": 2.0},
        {"u1.integral": -0.3, "model.a": 1.0}, {"u1.integral": -0.3, "model.a": 2.0}]
    path = write_sweep(serial, tmp_path / "s.csv")
    assert len(path.read_text().splitlines()) == 5


def test_sweep_records_cell_failures():
    cfg = config_from_dict(small_thm1(t_end=0.2))
    rows = sweep(cfg, {"model.a": [2.0, -1.0]})
    assert rows[0]["outcome"] == "GLOBAL_WINDOW"
    assert rows[1]["outcome"] == "INCONCLUSIVE" and "model.a" in rows[1]["reason"]


def test_sweep_limit():
    with pytest.raises(ValidationError):
        sweep(config_from_dict(small_thm1()), {"run.cfl": list(np.linspace(0.1, 0.5, 101)),
                                                "model.a": list(range(1, 101))})


def test_cross_validate_zero_data():
    raw = dict(MINIMAL, grid={"x_half_width": 5.0, "n": 128}, run={"t_end": 1.0})
    d = cross_validate(config_from_dict(raw))
    assert d.agree and np.all(d.l2 == 0) and np.all(d.linf == 0) and d.times.size > 2


def test_cli_check_and_run(tmp_path, capsys):
    assert cli.main(["check", "theorem2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["hypotheses"]["THM2"]["satisfied"] is True
    assert out["degeneracy_time_bound"] == pytest.approx(1.0)

    p = tmp_path / "s.toml"
    p.write_text("""
[model]
kind = "zabusky"
a = 2.0
[u0]
kind = "zero"
[u1]
kind = "bump"
integral = -0.375
[grid]
x_half_width = 3.0
n = 400
[run]
t_end = 0.5
""", encoding="utf-8")
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "run-riemann.csv").exists()
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o"), "--expect", "global"]) == 0
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o"), "--expect", "degenerate"]) == 2
    assert cli.main(["sweep", str(p), "--axis", "u1.integral=-0.1,-0.2", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "run-sweep.csv").exists()


def test_cli_config_error(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('[model]\nkind = "zabusky"\na = 0\n[u0]\nkind="zero"\n[u1]\nkind="zero"\n', encoding="utf-8")
    assert cli.main(["run", str(p)]) == 4
    assert "model.a" in capsys.readouterr().err
    assert cli.main(["check", str(tmp_path / "nope.toml")]) == 4


def test_cli_inconclusive(tmp_path):
    p = tmp_path / "both.toml"
    # both thresholds trip in the same record
    p.write_text('[model]\nkind = "zabusky"\na = 2\n[u0]\nkind="zero"\n[u1]\nkind="bump"\n'
                 'amplitude = -0.3\n[grid]\nx_half_width = 3\nn = 64\n[run]\nt_end = 0.1\n'
                 'eps_deg = 2.0\nm_blow = 1e-9\n', encoding="utf-8")
    assert cli.main(["run", str(p), "--out", str(tmp_path)]) == 3


def test_parse_axis():
    assert cli.parse_axis("u1.integral=-0.1,0.2,abc") == ("u1.integral", [-0.1, 0.2, "abc"])
    with pytest.raises(ValidationError):
        cli.parse_axis("nonsense")


def test_degeneracy_time_refines_downward():
    cfg = load_scenario("theorem2")
    stops = [run(cfg.with_overrides({"grid.n": n}), "flux").classification.t_stop for n in (600, 1200, 2400)]
    assert all(b <= a + 1e-12 for a, b in zip(stops, stops[1:]))
    assert stops[-1] <= 1.05
