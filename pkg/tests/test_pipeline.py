import json

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from biphoton.acceptance import default_report
from biphoton.errors import ConfigError, GridTooLarge, UnderResolved, UnknownKey
from biphoton.grid import Grid1D
from biphoton.output import pattern_csv
from biphoton.params import ExperimentParams, Scenario
from biphoton.pipeline import (GEOMETRY, ScenarioKind, ScenarioSpec, Sweep, run_oracle, run_scenario,
                               run_sweep)

P = ExperimentParams()


def test_coincidence_report_at_defaults():
    r = default_report(ScenarioKind.BIPHOTON)
    m = r.metrics
    assert m["expected_spacing"] == pytest.approx(100.0)
    assert m["patterns"]["analytic"]["spacing"] == pytest.approx(100.0, rel=1e-2)
    assert m["regime"]["all_pass"]
    assert m["geometry"]["scenario"] == "Colocated"
    for key in ("comparison", "case_weights", "term_weights", "slit_prefactor", "oracle", "detection_model"):
        assert key in m
    cw = m["case_weights"]["exact"]
    assert cw["p_same"] + cw["p_diff"] + cw["p_blocked"] == pytest.approx(1.0, abs=1e-8)
    assert r.analytic.axis == r.numeric.axis == r.four_term.axis
    json.dumps(m)


def test_nonlocal_matches_colocated_exactly():
    a = default_report(ScenarioKind.BIPHOTON)
    b = default_report(ScenarioKind.NONLOCAL, P.with_(scenario="Nonlocal"))
    for k in ("analytic", "numeric", "four_term"):
        assert np.array_equal(getattr(a, k).density, getattr(b, k).density)
    assert pattern_csv(a.analytic, a.numeric) == pattern_csv(b.analytic, b.numeric)
    assert b.metrics["geometry"] == {"scenario": "Nonlocal", **GEOMETRY[ScenarioKind.NONLOCAL]}
    assert a.numeric.label != b.numeric.label


def test_spec_aligns_params_scenario_with_kind():
    assert ScenarioSpec(ScenarioKind.NONLOCAL, P).params.scenario is Scenario.NONLOCAL
    assert ScenarioSpec(ScenarioKind.BIPHOTON, P.with_(scenario="Nonlocal")).params.scenario is Scenario.COLOCATED


def test_conditional_spacing_twice_coincidence():
    c = default_report(ScenarioKind.CONDITIONAL).metrics["patterns"]["analytic"]["spacing"]
    b = default_report(ScenarioKind.BIPHOTON).metrics["patterns"]["analytic"]["spacing"]
    assert c == pytest.approx(200.0, rel=1e-2)
    assert c / b == pytest.approx(2.0, abs=1e-3)


def test_spread_audit_reported():
    audit = run_scenario(ScenarioSpec(params=P.with_(dist_source_slit=0.1))).metrics["spread_audit"]
    assert audit["ratio_x"] == pytest.approx(0.5, rel=1e-6)
    assert audit["ratio_k"] == pytest.approx(2.0, rel=1e-6)


def test_sweep_needs_two_values():
    with pytest.raises(ConfigError):
        run_sweep(ScenarioSpec(sweep=Sweep("sigma", (0.5,))))
    with pytest.raises(ConfigError):
        run_sweep(ScenarioSpec())


def test_sweep_rejects_unknown_or_fixed_parameter():
    with pytest.raises(ConfigError):
        Sweep("lam", (1.0, 2.0))
    with pytest.raises(ConfigError):
        Sweep.parse("sigma:0.1,0.2")
    assert Sweep.parse("slit_sep=2, 5,10").values == (2.0, 5.0, 10.0)


def _scaled_spread(rows, key):
    scaled = [row[key] * row["slit_sep"] for row in rows]
    return max(scaled) / min(scaled) - 1


def test_spacing_scales_inversely_with_slit_separation():
    # The oracle follows the closed form only where the pair is still
    # position-correlated at the slits, so the oracle half runs at L = 0.1.
    d_values = (2.0, 5.0, 10.0)
    rows = run_sweep(ScenarioSpec(sweep=Sweep("slit_sep", d_values))).summary()
    assert _scaled_spread(rows, "spacing_analytic") < 0.02
    rows = run_sweep(ScenarioSpec(params=P.with_(dist_source_slit=0.1), sweep=Sweep("slit_sep", d_values))).summary()
    assert _scaled_spread(rows, "spacing_analytic") < 0.02
    assert _scaled_spread(rows, "spacing_numeric") < 0.02


def test_sweep_records_point_failures_and_continues():
    sweep = run_sweep(ScenarioSpec(sweep=Sweep("slit_width", (0.2, 0.001))))
    ok, bad = sweep.points
    assert ok.report is not None and ok.error is None
    assert bad.report is None and "GridTooLarge" in bad.error
    rows = sweep.summary()
    assert rows[1]["error"] == bad.error


def test_invalid_sweep_value_is_config_error():
    with pytest.raises(ConfigError):
        run_sweep(ScenarioSpec(sweep=Sweep("slit_width", (0.2, 6.0))))


def test_errors_name_the_failing_stage():
    coarse = Grid1D.centered(1e5, 64)
    with pytest.raises(UnderResolved, match=r"^\[propagate to screen\]"):
        run_oracle(P, coarse)
    with pytest.raises(GridTooLarge):
        run_oracle(P, Grid1D.centered(800.0, 8192))


def test_identical_config_gives_identical_csv():
    spec = ScenarioSpec(params=P.with_(dist_source_slit=1.0))
    a = run_scenario(spec, audit=False)
    with threadpool_limits(limits=2):
        b = run_scenario(spec, audit=False)
    assert pattern_csv(a.analytic, a.numeric) == pattern_csv(b.analytic, b.numeric)


def test_sweep_parallel_matches_serial():
    spec = ScenarioSpec(params=P.with_(dist_source_slit=0.1), sweep=Sweep("sigma", (0.5, 5.0)))
    serial = run_sweep(spec, jobs=1)
    parallel = run_sweep(spec, jobs=2)
    assert [p.value for p in parallel.points] == [0.5, 5.0]
    for s, p in zip(serial.points, parallel.points):
        assert pattern_csv(s.report.analytic, s.report.numeric) == pattern_csv(p.report.analytic, p.report.numeric)


def test_routes_agree():
    p = P.with_(dist_source_slit=1.0)
    screen = ScenarioSpec(params=p).detector_grid()
    a = run_oracle(p, screen, route="field").screen.amp
    b = run_oracle(p, screen, route="separable").screen.amp
    assert np.max(np.abs(a - b)) < 1e-9 * np.max(np.abs(a))


def test_spec_round_trip():
    spec = ScenarioSpec(ScenarioKind.CONDITIONAL, P.with_(sigma=0.3), Grid1D.centered(400.0, 512),
                        ("csv",), Sweep("omega_big", (20.0, 50.0)), 24, None, "separable")
    again = ScenarioSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again == spec


@pytest.mark.parametrize("bad, exc", [
    ({"scenario": "Elsewhere"}, ConfigError),
    ({"schema_version": 2}, ConfigError),
    ({"colour": "red"}, UnknownKey),
    ({"numerics": {"threads": 4}}, UnknownKey),
    ({"sweep": {"param": "sigma", "values": [1, 2], "step": 1}}, UnknownKey),
    ({"outputs": ["png"]}, ConfigError),
    ({"numerics": {"route": "magic"}}, ConfigError),
    ({"params": {"sigma": -1}}, ConfigError),
])
def test_spec_validation(bad, exc):
    with pytest.raises(exc):
        ScenarioSpec.from_dict(bad)


def test_shipped_configs_load():
    from pathlib import Path

    root = Path(__file__).resolve().parent.parent / "configs"
    specs = {p.name: ScenarioSpec.from_json(p) for p in sorted(root.glob("*.json"))}
    assert specs["default.json"].params == P
    assert specs["sigma_sweep.json"].sweep.values == (0.1, 0.5, 1.0, 5.0, 50.0)
