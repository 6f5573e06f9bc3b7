"""Entangled-photon double-slit simulation.

Closed-form coincidence and conditional interference laws, checked against a
numeric oracle that propagates the sampled two-photon state source -> slits ->
screen.
"""
from .params import ExperimentParams, Scenario, validate
from .pipeline import ScenarioKind, ScenarioSpec, Sweep, run_scenario, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ExperimentParams", "Scenario", "ScenarioKind", "ScenarioSpec", "Sweep",
    "run_scenario", "run_sweep", "validate",
]
