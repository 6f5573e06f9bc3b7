"""Closed-form screen state behind the double slit and the two interference laws.

The four-term amplitude is evaluated as written, with both Gaussian term
weights, so dropping the different-slit terms is a measurable approximation
rather than an assumption.  The laws themselves are the reduced forms:

* coincidence at equal positions: ``eps^2 f(x)^2 [1 + cos(4 pi x d / lambda D)]``
* detector 2 fixed at 0:           ``eps^2 f(x1/2)^2 [1 + cos(2 pi x1 d / lambda D)]``

with ``f(x) = sin(2 pi x eps / lambda D) / (2 pi x / lambda D)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import Pattern, Provenance
from .grid import Grid1D
from .params import ExperimentParams
from .propagation import propagate_analytic


@dataclass(frozen=True)
class FinalStateTerms:
    weight_same: float
    weight_diff: float
    prefactor: complex
    alpha: float
    slit_sep: float
    slit_width: float
    lam: float
    dist_slit_screen: float

    @property
    def lam_d(self) -> float:
        return self.lam * self.dist_slit_screen

    def to_dict(self) -> dict:
        out = asdict(self)
        out["prefactor"] = {"re": self.prefactor.real, "im": self.prefactor.imag}
        return out


def term_weights(params: ExperimentParams) -> FinalStateTerms:
    """Gaussian weights of the same-slit and different-slit terms.

    The prefactor is the normalised slit-plane amplitude times the
    ``1/(i lambda D)`` of the two one-photon kernels.
    """
    a = params.alpha
    d2 = params.slit_sep**2
    s2, o2 = params.sigma**2, params.omega_big**2
    w_same = math.exp(-d2 * o2 / (4 * o2**2 + 4 * a**2))
    w_diff = math.exp(-d2 * s2 / (4 * s2**2 + 4 * a**2))
    lam_d = params.lam * params.dist_slit_screen
    c_t = propagate_analytic(params, params.dist_source_slit).norm / (1j * lam_d)
    return FinalStateTerms(w_same, w_diff, c_t, a, params.slit_sep, params.slit_width,
                           params.lam, params.dist_slit_screen)


def _geometry(obj) -> tuple[float, float]:
    return obj.slit_width, obj.lam * obj.dist_slit_screen


def envelope_f(x, params: ExperimentParams | FinalStateTerms):
    """``sin(2 pi x eps / lambda D) / (2 pi x / lambda D)``, equal to ``eps`` at 0."""
    eps, lam_d = _geometry(params)
    return eps * np.sinc(2 * np.asarray(x, dtype=float) * eps / lam_d)


def final_state_amplitude(r, q, terms: FinalStateTerms):
    """Sum of the four screen-state terms at centre-of-mass ``r`` and relative ``q``."""
    r = np.asarray(r, dtype=float)
    q = np.asarray(q, dtype=float)
    h = terms.slit_sep / 2
    k = 2j * math.pi / terms.lam_d

    def f(u):
        return envelope_f(u, terms)

    same = (np.exp(k * (r - h) ** 2) * f(r - h) + np.exp(k * (r + h) ** 2) * f(r + h)) \
        * np.exp(k * q * q) * f(q) * terms.weight_same
    diff = (np.exp(k * (q + h) ** 2) * f(q + h) + np.exp(k * (q - h) ** 2) * f(q - h)) \
        * np.exp(k * r * r) * f(r) * terms.weight_diff
    return terms.prefactor * (same + diff)


def coincidence_law(x, terms: FinalStateTerms):
    """Unnormalised density of both photons arriving together at ``x``."""
    x = np.asarray(x, dtype=float)
    return (abs(terms.prefactor) ** 2 * terms.slit_width**2 * envelope_f(x, terms) ** 2
            * (1 + np.cos(4 * math.pi * x * terms.slit_sep / terms.lam_d)))


def conditional_law(x1, terms: FinalStateTerms):
    """Unnormalised density at ``x1`` given the partner detected at ``x2 = 0``."""
    x1 = np.asarray(x1, dtype=float)
    return (abs(terms.prefactor) ** 2 * terms.slit_width**2 * envelope_f(x1 / 2, terms) ** 2
            * (1 + np.cos(2 * math.pi * x1 * terms.slit_sep / terms.lam_d)))


def coincidence_pattern(axis: Grid1D, terms: FinalStateTerms, label: str = "coincidence") -> Pattern:
    return Pattern.from_values(axis, coincidence_law(axis.x, terms), Provenance.ANALYTIC, label)


def conditional_pattern(axis: Grid1D, terms: FinalStateTerms, label: str = "conditional") -> Pattern:
    return Pattern.from_values(axis, conditional_law(axis.x, terms), Provenance.ANALYTIC, label)


def four_term_coincidence(axis: Grid1D, terms: FinalStateTerms, label: str = "coincidence-4term") -> Pattern:
    """``|amplitude(x, 0)|^2`` from all four terms, normalised over ``axis``."""
    amp = final_state_amplitude(axis.x, 0.0, terms)
    return Pattern.from_values(axis, np.abs(amp) ** 2, Provenance.ANALYTIC, label)


def four_term_conditional(axis: Grid1D, terms: FinalStateTerms, label: str = "conditional-4term") -> Pattern:
    """``|amplitude(x1/2, x1/2)|^2`` from all four terms (detector 2 at 0)."""
    amp = final_state_amplitude(axis.x / 2, axis.x / 2, terms)
    return Pattern.from_values(axis, np.abs(amp) ** 2, Provenance.ANALYTIC, label)
