"""The acceptance criteria with the slits close to the source (L = 0.1).

At the default L = 100 the pair has lost its position correlation by the
time it reaches the slits, so the oracle shows single-photon fringes there
(see README).  With L = 0.1 every other default is unchanged, the pair is
still correlated at the slits, and the oracle reproduces the closed-form laws.
"""
import pytest

from biphoton import acceptance
from biphoton.params import ExperimentParams, validate

CORRELATED = ExperimentParams(dist_source_slit=0.1)


def test_correlated_configuration_is_in_regime():
    report = validate(CORRELATED)
    assert report.all_pass and report.correlation.passed


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion_when_correlated(criterion):
    result = criterion(CORRELATED)
    print(result.line())
    assert result.passed, result.line()


def test_default_oracle_shows_single_photon_fringes():
    # Pins the behaviour behind the failing default-parameter criteria: the
    # oracle's coincidence fringes have the conditional (lambda D / d) period.
    report = acceptance.default_report(acceptance.ScenarioKind.BIPHOTON)
    p = report.spec.params
    assert report.metrics["patterns"]["numeric"]["spacing"] == pytest.approx(
        p.lam * p.dist_slit_screen / p.slit_sep, rel=0.02)
    assert report.metrics["case_weights"]["exact"]["ratio"] > 0.9
