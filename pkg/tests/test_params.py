import json
import math

import pytest
from hypothesis import given, strategies as st

from biphoton.errors import ConfigError, NonPositiveLength, OverlappingSlits, UnknownKey
from biphoton.params import LENGTH_FIELDS, ExperimentParams, Scenario, alpha, k0, validate


def test_defaults_pass_every_regime_check(defaults):
    report = validate(defaults)
    assert report.all_pass
    assert report["beam_width"].value == pytest.approx(157.08, rel=1e-4)


def test_defaults_are_not_position_correlated_at_the_slits(defaults):
    # Reported separately from the regime checks: at L=100 the different-slit
    # weight is close to the same-slit weight.
    corr = validate(defaults).correlation
    assert not corr.passed
    assert corr.value > 0.9


def test_correlated_configuration_passes_correlation(correlated):
    assert validate(correlated).correlation.passed


def test_touching_slits_rejected():
    with pytest.raises(OverlappingSlits):
        ExperimentParams(slit_width=5.0, slit_sep=5.0)


@pytest.mark.parametrize("name", LENGTH_FIELDS)
@pytest.mark.parametrize("value", [0.0, -1.0, math.nan, math.inf])
def test_lengths_must_be_positive_and_finite(name, value):
    with pytest.raises(NonPositiveLength):
        ExperimentParams().with_(**{name: value})


def test_product_state_flagged():
    report = validate(ExperimentParams(sigma=50.0, omega_big=50.0))
    assert report.product_state
    assert report.entanglement == "product state"
    assert not validate(ExperimentParams()).product_state


@pytest.mark.parametrize("lam, L, expected", [(1.0, 2 * math.pi, 1.0), (1.0, 0.0, 0.0), (2.0, math.pi, 1.0)])
def test_alpha_examples(lam, L, expected):
    p = ExperimentParams(lam=lam)
    assert alpha(p, L) == pytest.approx(expected, abs=1e-15)


def test_alpha_property_uses_source_distance():
    p = ExperimentParams(lam=1.0, dist_source_slit=2 * math.pi)
    assert p.alpha == pytest.approx(1.0)
    assert k0(p) == pytest.approx(2 * math.pi)


@given(lam=st.floats(0.01, 100), L=st.floats(0.01, 1e4), c=st.floats(0.01, 100))
def test_alpha_invariant_under_reciprocal_scaling(lam, L, c):
    p = ExperimentParams(lam=lam)
    q = ExperimentParams(lam=c * lam)
    assert alpha(q, L / c) == pytest.approx(alpha(p, L), rel=1e-12)


@given(lam=st.floats(0.01, 100), L=st.floats(0, 1e4), c=st.floats(0.01, 100))
def test_alpha_linear(lam, L, c):
    p = ExperimentParams(lam=lam)
    assert alpha(p, c * L) == pytest.approx(c * alpha(p, L), rel=1e-12, abs=1e-300)


@given(sigma=st.floats(0.01, 100), d=st.floats(0.5, 50))
def test_validate_deterministic_and_never_raises(sigma, d):
    p = ExperimentParams(sigma=sigma, slit_sep=d, slit_width=0.1)
    assert validate(p).to_dict() == validate(p).to_dict()


def test_regime_warnings_do_not_raise():
    report = validate(ExperimentParams(omega_big=1.0, dist_source_slit=1e4))
    assert not report.all_pass
    assert report["beam_width"].status == "warn"
    assert report.warnings


def test_json_round_trip(tmp_path):
    p = ExperimentParams(sigma=0.3, scenario=Scenario.NONLOCAL)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_dict()))
    assert ExperimentParams.from_json(path) == p
    assert p.to_dict()["lambda"] == p.lam


def test_unknown_key_rejected():
    with pytest.raises(UnknownKey):
        ExperimentParams.from_dict({"lambda": 1.0, "wavelength": 2.0})


def test_bad_scenario_is_config_error():
    with pytest.raises(ConfigError):
        ExperimentParams.from_dict({"scenario": "Elsewhere"})
