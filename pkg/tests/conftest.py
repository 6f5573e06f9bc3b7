import pytest
from hypothesis import HealthCheck, settings

from biphoton.params import ExperimentParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def defaults():
    return ExperimentParams()


@pytest.fixture
def correlated():
    """Defaults with the slits moved close to the source, where the pair is still position-correlated."""
    return ExperimentParams(dist_source_slit=0.1)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria (default parameters)")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
