"""Exit criteria of the package.

Each ``criterion_N(params)`` returns a :class:`CheckResult` whose parts carry
the measured value, the target and the tolerance.  The official run uses the
default parameter set; other parameter sets can be passed to see how the
criteria behave elsewhere.  ``run_all`` evaluates all of them and is what
``simulate --check`` and ``tests/test_acceptance.py`` use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import fields, propagation
from .analysis import compare
from .output import pattern_csv
from .params import ExperimentParams, validate
from .pipeline import Report, ScenarioKind, ScenarioSpec, Sweep, run_scenario, run_sweep, spread_audit

DEFAULTS = ExperimentParams()

SPACING_TOL_ANALYTIC = 0.01
SPACING_TOL_ORACLE = 0.02
RATIO_TOL = 0.05
L2_MAX = 0.05
WINDOW_FRINGES = 3
UNITARITY_TOL = 1e-10
SEMIGROUP_TOL = 1e-10
GAUSSIAN_TOL = 1e-6
COV_TOL = 1e-8
PRODUCT_TOL = 1e-6
SIGMA_SWEEP = (0.1, 0.5, 1.0, 5.0, 50.0)
SUPPRESSION_MAX = 1e-3
SYM_TOL_ANALYTIC = 1e-10
SYM_TOL_ORACLE = 1e-6
AUDIT_POINTS = ((0.5, 50.0), (1.0, 20.0), (2.0, 10.0))
AUDIT_TOL = 0.01


@dataclass(frozen=True)
class Part:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CheckResult:
    number: int
    title: str
    parts: tuple[Part, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.parts)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        inner = "; ".join(f"{p.name} {'ok' if p.passed else 'FAILED'} ({p.detail})" for p in self.parts)
        return f"[{status}] {self.number:2d}. {self.title}: {inner}"


def _within(name: str, value: float, target: float, rel: float) -> Part:
    err = abs(value / target - 1)
    return Part(name, err <= rel, f"{value:.6g} vs {target:.6g}, rel err {err:.2e} <= {rel:g}")


@lru_cache(maxsize=None)
def default_report(kind: ScenarioKind, params: ExperimentParams = DEFAULTS) -> Report:
    return run_scenario(ScenarioSpec(kind, params), audit=False)


def _spacing(report: Report, which: str) -> float:
    m = report.metrics["patterns"][which]
    return m.get("spacing", math.nan)


def criterion_1(params: ExperimentParams = DEFAULTS) -> CheckResult:
    r = default_report(ScenarioKind.BIPHOTON, params)
    w = params.lam * params.dist_slit_screen / (2 * params.slit_sep)
    return CheckResult(1, "biphoton fringe spacing lambda D / 2d", (
        _within("closed form", _spacing(r, "analytic"), w, SPACING_TOL_ANALYTIC),
        _within("oracle diagonal", _spacing(r, "numeric"), w, SPACING_TOL_ORACLE),
    ))


def criterion_2(params: ExperimentParams = DEFAULTS) -> CheckResult:
    r = default_report(ScenarioKind.CONDITIONAL, params)
    c = default_report(ScenarioKind.BIPHOTON, params)
    w = params.lam * params.dist_slit_screen / params.slit_sep
    parts = [
        _within("closed form", _spacing(r, "analytic"), w, SPACING_TOL_ANALYTIC),
        _within("oracle x2=0 slice", _spacing(r, "numeric"), w, SPACING_TOL_ORACLE),
    ]
    for which, name in (("analytic", "closed-form ratio"), ("numeric", "oracle ratio")):
        ratio = _spacing(r, which) / _spacing(c, which)
        parts.append(Part(name, abs(ratio - 2.0) <= RATIO_TOL, f"{ratio:.4f} vs 2.00 +- {RATIO_TOL}"))
    return CheckResult(2, "conditional fringe spacing lambda D / d", tuple(parts))


def criterion_3(params: ExperimentParams = DEFAULTS) -> CheckResult:
    a = default_report(ScenarioKind.BIPHOTON, params)
    b = default_report(ScenarioKind.NONLOCAL, params.with_(scenario='Nonlocal'))
    same_arrays = all(
        np.array_equal(getattr(a, k).density, getattr(b, k).density) and getattr(a, k).axis == getattr(b, k).axis
        for k in ("analytic", "numeric", "four_term")
    )
    same_csv = pattern_csv(a.analytic, a.numeric) == pattern_csv(b.analytic, b.numeric)
    return CheckResult(3, "nonlocal equivalence", (
        Part("pattern arrays bit-identical", same_arrays, "analytic, oracle and four-term densities"),
        Part("CSV bytes identical", same_csv, "pattern.csv content"),
    ))


def criterion_4(params: ExperimentParams = DEFAULTS) -> CheckResult:
    r = default_report(ScenarioKind.BIPHOTON, params)
    regime = validate(params)
    window = WINDOW_FRINGES * params.lam * params.dist_slit_screen / (2 * params.slit_sep)
    cmp = compare(r.analytic, r.numeric, window)
    return CheckResult(4, "closed form vs oracle (coincidence)", (
        Part("regime checks pass", regime.all_pass, ", ".join(f"{c.name}={c.value:.3g}" for c in regime.checks)),
        Part("l2 error", cmp.l2_err < L2_MAX, f"{cmp.l2_err:.4g} < {L2_MAX} over |x| <= {window:g}"),
    ))


@lru_cache(maxsize=None)
def _source_field(params: ExperimentParams):
    g = propagation.source_grid(params, params.dist_source_slit)
    return fields.sample_gepr(params, g, g)


def criterion_5(params: ExperimentParams = DEFAULTS) -> CheckResult:
    psi = _source_field(params)
    L = params.dist_source_slit
    full = propagation.propagate_numeric(psi, params, L)
    split = propagation.propagate_numeric(propagation.propagate_numeric(psi, params, 0.4 * L), params, 0.6 * L)
    dn = abs(fields.norm2(full) - fields.norm2(psi))
    ds = float(np.abs(full.amp - split.amp).max() / np.abs(full.amp).max())
    return CheckResult(5, "unitarity and semigroup", (
        Part("norm conserved", dn <= UNITARITY_TOL, f"|dnorm| = {dn:.2e} <= {UNITARITY_TOL:g}"),
        Part("0.4L then 0.6L == L", ds <= SEMIGROUP_TOL, f"max diff / peak = {ds:.2e} <= {SEMIGROUP_TOL:g}"),
    ))


def criterion_6(params: ExperimentParams = DEFAULTS) -> CheckResult:
    psi = _source_field(params)
    L = params.dist_source_slit
    num = propagation.propagate_numeric(psi, params, L)
    ana = propagation.sample_gaussian(propagation.propagate_analytic(params, L), psi.grid1, psi.grid2)
    err = float(np.abs(num.amp - ana.amp).max() / np.abs(ana.amp).max())
    return CheckResult(6, "Gaussian closed form vs numeric propagation", (
        Part("node-wise", err <= GAUSSIAN_TOL, f"max diff / peak = {err:.2e} <= {GAUSSIAN_TOL:g}"),
    ))


def criterion_7(params: ExperimentParams = DEFAULTS) -> CheckResult:
    p = params.with_(sigma=params.omega_big)
    g = propagation.source_grid(p, 0.0)
    psi = fields.sample_gepr(p, g, g)
    m = fields.moments(psi)
    rho = psi.density() * psi.cell
    prod = np.outer(rho.sum(axis=1), rho.sum(axis=0)) / rho.sum()
    central = rho >= 1e-3 * rho.max()
    rel = float(np.max(np.abs(rho[central] - prod[central]) / rho[central]))
    return CheckResult(7, "product state at sigma = Omega", (
        Part("covariance", abs(m.cov) < COV_TOL, f"|cov| = {abs(m.cov):.2e} < {COV_TOL:g}"),
        Part("joint = product of marginals", rel <= PRODUCT_TOL, f"max rel diff = {rel:.2e} <= {PRODUCT_TOL:g}"),
    ))


@lru_cache(maxsize=None)
def sigma_sweep(params: ExperimentParams = DEFAULTS):
    return run_sweep(ScenarioSpec(ScenarioKind.BIPHOTON, params, sweep=Sweep("sigma", SIGMA_SWEEP)))


def criterion_8(params: ExperimentParams = DEFAULTS) -> CheckResult:
    rows = sigma_sweep(params).summary()
    ratios = [row.get("p_diff_over_p_same", math.nan) for row in rows]
    monotone = all(b >= a for a, b in zip(ratios, ratios[1:]))
    shown = ", ".join(f"{s:g}:{r:.3g}" for s, r in zip(SIGMA_SWEEP, ratios))
    return CheckResult(8, "correlation suppresses different-slit passage", (
        Part("p_diff/p_same non-decreasing in sigma", monotone, shown),
        Part("suppressed at sigma=0.1", ratios[0] < SUPPRESSION_MAX, f"{ratios[0]:.3g} < {SUPPRESSION_MAX:g}"),
    ))


def _asym(p) -> float:
    d = p.density[1:] if p.axis.n % 2 == 0 else p.density
    return float(np.max(np.abs(d - d[::-1])) / np.max(p.density))


def criterion_9(params: ExperimentParams = DEFAULTS) -> CheckResult:
    parts = []
    for kind in ScenarioKind:
        r = default_report(kind, params)
        for which, tol in (("analytic", SYM_TOL_ANALYTIC), ("four_term", SYM_TOL_ANALYTIC), ("numeric", SYM_TOL_ORACLE)):
            a = _asym(getattr(r, which))
            parts.append(Part(f"{kind.value}/{which}", a <= tol, f"{a:.1e} <= {tol:g}"))
    return CheckResult(9, "mirror symmetry P(x) = P(-x)", tuple(parts))


def criterion_10(params: ExperimentParams = DEFAULTS) -> CheckResult:
    audits = [spread_audit(params.with_(sigma=s, omega_big=o)) for s, o in AUDIT_POINTS]
    parts = [Part("reported", all(a is not None and "ratio_x" in a and "ratio_k" in a for a in audits),
                  "ratio_x, ratio_k present in the metrics")]
    for key in ("ratio_x", "ratio_k"):
        vals = [a[key] for a in audits]
        spread = max(vals) / min(vals) - 1
        parts.append(Part(f"{key} constant", spread <= AUDIT_TOL,
                          f"{', '.join(f'{v:.6f}' for v in vals)}; spread {spread:.1e} <= {AUDIT_TOL:g}"))
    return CheckResult(10, "position / wave-vector spread audit", tuple(parts))


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(params: ExperimentParams = DEFAULTS, echo=print) -> list[CheckResult]:
    results = []
    for crit in CRITERIA:
        res = crit(params)
        results.append(res)
        if echo:
            echo(res.line())
    return results
