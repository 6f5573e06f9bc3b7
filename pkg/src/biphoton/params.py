"""Physical parameters of the double-slit experiment and their regime checks.

All lengths share one arbitrary unit and c = 1, so propagation is expressed
purely in distances (source-to-slit ``L`` and slit-to-screen ``D``).
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError, NonPositiveLength, OverlappingSlits, UnknownKey


class Scenario(str, enum.Enum):
    COLOCATED = "Colocated"
    NONLOCAL = "Nonlocal"


# JSON key -> attribute name. ``lambda`` is a keyword in Python.
_JSON_FIELDS = {
    "lambda": "lam",
    "sigma": "sigma",
    "omega_big": "omega_big",
    "slit_sep": "slit_sep",
    "slit_width": "slit_width",
    "dist_source_slit": "dist_source_slit",
    "dist_slit_screen": "dist_slit_screen",
    "scenario": "scenario",
}
LENGTH_FIELDS = tuple(k for k in _JSON_FIELDS if k != "scenario")


@dataclass(frozen=True)
class ExperimentParams:
    """Wavelength, state widths and geometry of one experiment.

    ``sigma`` is the width of the relative coordinate and ``omega_big`` the
    width of the centre-of-mass coordinate of the two-photon Gaussian.  Slits
    of width ``slit_width`` sit at ``+-slit_sep/2``.
    """

    lam: float = 1.0
    sigma: float = 0.5
    omega_big: float = 50.0
    slit_sep: float = 5.0
    slit_width: float = 0.2
    dist_source_slit: float = 100.0
    dist_slit_screen: float = 1000.0
    scenario: Scenario = Scenario.COLOCATED

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        for key in LENGTH_FIELDS:
            value = getattr(self, _JSON_FIELDS[key])
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise NonPositiveLength(f"{key} must be a finite positive length, got {value!r}")
            object.__setattr__(self, _JSON_FIELDS[key], float(value))
        if self.slit_width >= self.slit_sep:
            raise OverlappingSlits(
                f"slit_width={self.slit_width} must be smaller than slit_sep={self.slit_sep}"
            )

    @property
    def alpha(self) -> float:
        return alpha(self)

    @property
    def k0(self) -> float:
        return k0(self)

    def with_(self, **changes) -> "ExperimentParams":
        """Copy with changes; accepts JSON names (``lambda``) or attribute names."""
        return replace(self, **{_JSON_FIELDS.get(k, k): v for k, v in changes.items()})

    def to_dict(self) -> dict[str, Any]:
        out = {key: getattr(self, attr) for key, attr in _JSON_FIELDS.items()}
        out["scenario"] = self.scenario.value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentParams":
        unknown = sorted(set(data) - set(_JSON_FIELDS))
        if unknown:
            raise UnknownKey(f"unknown parameter key(s): {', '.join(unknown)}")
        try:
            return cls(**{_JSON_FIELDS[k]: v for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


def alpha(params: ExperimentParams, distance: float | None = None) -> float:
    """Diffraction parameter lambda * distance / 2 pi (defaults to source-to-slit)."""
    if distance is None:
        distance = params.dist_source_slit
    return params.lam * distance / (2 * math.pi)


def k0(params: ExperimentParams) -> float:
    return 2 * math.pi / params.lam


@dataclass(frozen=True)
class RegimeCheck:
    name: str
    value: float
    threshold: float
    passed: bool
    description: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "warn"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "status": self.status,
            "description": self.description,
        }


@dataclass(frozen=True)
class RegimeReport:
    """Outcome of :func:`validate`.

    ``checks`` are the approximation conditions of the closed-form model.
    ``correlation`` is reported separately: it measures whether the pair is
    still position-correlated at the slit plane, which decides whether the
    different-slit terms of the screen state may be dropped.
    """

    checks: tuple[RegimeCheck, ...]
    correlation: RegimeCheck
    product_state: bool
    entanglement: str
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> RegimeCheck:
        for c in (*self.checks, self.correlation):
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "all_pass": self.all_pass,
            "checks": [c.to_dict() for c in self.checks],
            "correlation": self.correlation.to_dict(),
            "product_state": self.product_state,
            "entanglement": self.entanglement,
            "warnings": list(self.warnings),
        }


# "much greater than" is taken as a factor of 10.
BEAM_WIDTH_MIN = 10.0
SLIT_RATIO_MIN = 10.0
SIGMA_RATIO_MAX = 0.1
SLIT_PHASE_MAX = 0.1
CORRELATION_MAX = 1e-3


def slit_weight_ratio(params: ExperimentParams) -> float:
    """Different-slit over same-slit Gaussian weight at the slit plane."""
    a = params.alpha
    d2 = params.slit_sep**2
    s2, o2 = params.sigma**2, params.omega_big**2
    return math.exp(-d2 * s2 / (4 * s2**2 + 4 * a**2) + d2 * o2 / (4 * o2**2 + 4 * a**2))


def validate(params: ExperimentParams) -> RegimeReport:
    """Evaluate the approximation regime of ``params``.

    Hard invariants are enforced when the params are constructed; here only
    soft conditions are assessed, so the result never raises.
    """
    a = params.alpha
    beam = params.omega_big**2 / a
    slit_ratio = params.slit_sep / params.slit_width
    sig_ratio = params.sigma / params.omega_big
    slit_phase = math.pi * params.slit_width**2 / (2 * params.lam * params.dist_slit_screen)
    checks = (
        RegimeCheck("beam_width", beam, BEAM_WIDTH_MIN, beam >= BEAM_WIDTH_MIN,
                    "omega_big^2 * 2pi / (lambda L): incoming beam wide compared to diffraction"),
        RegimeCheck("slit_ratio", slit_ratio, SLIT_RATIO_MIN, slit_ratio >= SLIT_RATIO_MIN,
                    "d / eps: narrow slits"),
        RegimeCheck("sigma_ratio", sig_ratio, SIGMA_RATIO_MAX, sig_ratio <= SIGMA_RATIO_MAX,
                    "sigma / omega_big: strongly entangled source"),
        RegimeCheck("slit_phase", slit_phase, SLIT_PHASE_MAX, slit_phase <= SLIT_PHASE_MAX,
                    "pi eps^2 / (2 lambda D): dropped second-order phase across a slit"),
    )
    ratio = slit_weight_ratio(params)
    correlation = RegimeCheck(
        "slit_correlation", ratio, CORRELATION_MAX, ratio <= CORRELATION_MAX,
        "different-slit / same-slit weight at the slit plane",
    )
    product = math.isclose(params.sigma, params.omega_big, rel_tol=1e-12)
    if product:
        entanglement = "product state"
    elif params.sigma < params.omega_big:
        entanglement = "position-correlated"
    else:
        entanglement = "position-anticorrelated"
    warnings = tuple(f"{c.name}={c.value:.6g} outside regime (threshold {c.threshold:g})"
                     for c in (*checks, correlation) if not c.passed)
    return RegimeReport(checks, correlation, product, entanglement, warnings)
