"""Scenario runner: closed-form laws next to the numeric oracle.

The oracle never uses the closed forms.  It samples the source state,
propagates it numerically to the slit plane, truncates it with the binary
mask, propagates the surviving amplitude to the detector plane by kernel
quadrature, and slices it like a coincidence counter would.
"""
from __future__ import annotations

import contextlib
import enum
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from . import fields, model, optics, propagation
from .analysis import Pattern, compare, fringe_metrics
from .errors import BiphotonError, ConfigError, GridTooLarge, TooFewPeaks, UnderResolved, UnknownKey
from .fields import ComplexField2D
from .grid import Grid1D
from .params import ExperimentParams, Scenario, validate

SCHEMA_VERSION = 1
MAX_2D_N = 4096
SCREEN_NODES = 1024
SWEEPABLE = ("sigma", "omega_big", "slit_sep", "slit_width", "dist_source_slit", "dist_slit_screen")
OUTPUT_KINDS = ("csv", "svg", "report")


class ScenarioKind(str, enum.Enum):
    BIPHOTON = "BiphotonCoincidence"
    NONLOCAL = "NonlocalCoincidence"
    CONDITIONAL = "ConditionalSingle"

    @property
    def coincidence(self) -> bool:
        return self is not ScenarioKind.CONDITIONAL


GEOMETRY = {
    ScenarioKind.BIPHOTON: {
        "layout": "one source, one double slit at y=L, detector plane at y=L+D",
        "detection": "pair-resolving detector D1 records both photons at the same x",
    },
    ScenarioKind.NONLOCAL: {
        "layout": "photons separated by a polarizing beam splitter; double slits at y=-L and y=+L "
                  "with identical x-positions; detectors at y=-(L+D) and y=+(L+D)",
        "detection": "D1 and D2 move along x in synchrony (x1 = x2 = x) and count in coincidence",
    },
    ScenarioKind.CONDITIONAL: {
        "layout": "one source, one double slit at y=L, detector plane at y=L+D",
        "detection": "D2 fixed at x2 = 0; D1 scans x1 in coincidence with D2",
    },
}


@dataclass(frozen=True)
class Sweep:
    param: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.param not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.param!r}; choose one of {', '.join(SWEEPABLE)}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        """``"sigma=0.1,0.5,1"`` -> Sweep."""
        try:
            name, vals = text.split("=", 1)
            return cls(name.strip(), tuple(float(v) for v in vals.split(",") if v.strip()))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad sweep {text!r}; expected name=v1,v2,...") from exc


@dataclass(frozen=True)
class ScenarioSpec:
    """One run: scenario kind, physics, detector grid, outputs and an optional sweep.

    ``grid`` is the detector-plane axis (both detectors); when ``None`` it is
    chosen per run as ``1024`` nodes over ``+-4 lambda D / d`` with a node at 0.
    ``source_grid`` is the oracle's per-axis FFT grid (auto-sized when
    ``None``); ``route`` picks the oracle's source-to-slit propagation:
    ``"field"`` (full 2D spectral), ``"separable"`` or ``"auto"``.
    """

    kind: ScenarioKind = ScenarioKind.BIPHOTON
    params: ExperimentParams = field(default_factory=ExperimentParams)
    grid: Grid1D | None = None
    outputs: tuple[str, ...] = OUTPUT_KINDS
    sweep: Sweep | None = None
    nodes_per_slit: int = 16
    source_grid: Grid1D | None = None
    route: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        bad = set(self.outputs) - set(OUTPUT_KINDS)
        if bad:
            raise ConfigError(f"unknown output kind(s): {', '.join(sorted(bad))}")
        if self.route not in ("auto", "field", "separable"):
            raise ConfigError(f"unknown oracle route {self.route!r}")
        want = Scenario.NONLOCAL if self.kind is ScenarioKind.NONLOCAL else Scenario.COLOCATED
        if self.kind is not ScenarioKind.CONDITIONAL and self.params.scenario is not want:
            object.__setattr__(self, "params", replace(self.params, scenario=want))

    def detector_grid(self, params: ExperimentParams | None = None) -> Grid1D:
        if self.grid is not None:
            return self.grid
        p = params or self.params
        return Grid1D.centered(4 * p.lam * p.dist_slit_screen / p.slit_sep, SCREEN_NODES)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioSpec":
        allowed = {"schema_version", "scenario", "params", "grid", "outputs", "sweep", "numerics"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise UnknownKey(f"unknown config key(s): {', '.join(unknown)}")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
        try:
            kind = ScenarioKind(data.get("scenario", ScenarioKind.BIPHOTON.value))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        params = ExperimentParams.from_dict(data.get("params", {}))
        grid = Grid1D.from_dict(data["grid"]) if data.get("grid") else None
        sweep = None
        if data.get("sweep"):
            sw = data["sweep"]
            extra = set(sw) - {"param", "values"}
            if extra:
                raise UnknownKey(f"unknown sweep key(s): {', '.join(sorted(extra))}")
            sweep = Sweep(sw["param"], tuple(sw["values"]))
        num = dict(data.get("numerics") or {})
        extra = set(num) - {"nodes_per_slit", "source_grid", "route"}
        if extra:
            raise UnknownKey(f"unknown numerics key(s): {', '.join(sorted(extra))}")
        src = Grid1D.from_dict(num["source_grid"]) if num.get("source_grid") else None
        return cls(kind, params, grid, tuple(data.get("outputs", OUTPUT_KINDS)), sweep,
                   int(num.get("nodes_per_slit", 16)), src, num.get("route", "auto"))

    @classmethod
    def from_json(cls, path: str | Path) -> "ScenarioSpec":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.kind.value,
            "params": self.params.to_dict(),
            "grid": self.grid.to_dict() if self.grid else None,
            "outputs": list(self.outputs),
            "sweep": {"param": self.sweep.param, "values": list(self.sweep.values)} if self.sweep else None,
            "numerics": {
                "nodes_per_slit": self.nodes_per_slit,
                "source_grid": self.source_grid.to_dict() if self.source_grid else None,
                "route": self.route,
            },
        }


@contextlib.contextmanager
def stage(name: str):
    """Prefix errors raised inside with the pipeline stage that failed."""
    try:
        yield
    except BiphotonError as exc:
        if getattr(exc, "stage", None):
            raise
        new = type(exc)(f"[{name}] {exc}")
        new.stage = name
        raise new from exc


@dataclass(frozen=True, eq=False)
class OracleResult:
    route: str
    source_grid: Grid1D | None
    slit_field: ComplexField2D
    masked: ComplexField2D
    screen: ComplexField2D


def run_oracle(params: ExperimentParams, screen: Grid1D, nodes_per_slit: int = 16,
               route: str = "auto", source: Grid1D | None = None) -> OracleResult:
    """Numeric source -> slit -> screen propagation of the entangled pair."""
    L, D = params.dist_source_slit, params.dist_slit_screen
    if screen.n > MAX_2D_N:
        raise GridTooLarge(f"detector grid has {screen.n} nodes per axis (limit {MAX_2D_N})")
    with stage("aperture grid"):
        ap = optics.aperture_grid(params, nodes_per_slit)
        if ap.n > MAX_2D_N:
            raise GridTooLarge(f"slit-plane grid needs {ap.n} nodes per axis (limit {MAX_2D_N}); "
                               "slit_sep / slit_width is too large for the requested nodes_per_slit")
    if route == "auto":
        n = (source or propagation.source_grid(params, L)).n
        route = "field" if n <= MAX_2D_N else "separable"
    if route == "field":
        with stage("sample source"):
            src = source or propagation.source_grid(params, L)
            psi0 = fields.sample_gepr(params, src, src)
        with stage("propagate to slits"):
            slit = propagation.propagate_numeric_onto(psi0, params, L, ap, ap)
    else:
        src = None
        with stage("propagate to slits"):
            slit = propagation.propagate_source_separable(params, L, ap, ap)
    with stage("apply mask"):
        masked = optics.apply_mask(slit, optics.DoubleSlitMask.from_params(params))
    with stage("propagate to screen"):
        scr = propagation.propagate_kernel(masked, params, D, screen, screen)
    return OracleResult(route, src, slit, masked, scr)


def spread_audit(params: ExperimentParams) -> dict[str, Any] | None:
    """Numeric position / wave-vector spreads of the source against the nominal expressions."""
    g = propagation.source_grid(params, 0.0)
    if g.n > MAX_2D_N:
        return None
    psi = fields.sample_gepr(params, g, g)
    m = fields.moments(psi)
    k = fields.spectral_moments(psi)
    s, o = params.sigma, params.omega_big
    dx_num, dk_num = math.sqrt(m.var_x1), math.sqrt(k.var_k1)
    dx_nominal = math.sqrt(o * o + s * s)
    dk_nominal = 0.25 * math.sqrt(1 / (s * s) + 1 / (o * o))
    return {
        "grid": g.to_dict(),
        "delta_x1": dx_num, "delta_x2": math.sqrt(m.var_x2),
        "delta_k1": dk_num, "delta_k2": math.sqrt(k.var_k2),
        "cov_x": m.cov,
        "delta_x_nominal": dx_nominal, "delta_k_nominal": dk_nominal,
        "ratio_x": dx_num / dx_nominal, "ratio_k": dk_num / dk_nominal,
    }


@dataclass(frozen=True, eq=False)
class Report:
    spec: ScenarioSpec
    analytic: Pattern
    numeric: Pattern
    four_term: Pattern
    metrics: dict[str, Any]
    oracle: OracleResult | None = None

    @property
    def label(self) -> str:
        return self.spec.kind.value

    def to_dict(self) -> dict[str, Any]:
        return self.metrics


def _metrics_or_error(p: Pattern) -> dict[str, Any]:
    try:
        return fringe_metrics(p).to_dict()
    except (TooFewPeaks, UnderResolved) as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def run_scenario(spec: ScenarioSpec, audit: bool = True, keep_fields: bool = False) -> Report:
    """Run the closed-form and oracle paths for one scenario and compare them."""
    p = spec.params
    regime = validate(p)
    screen = spec.detector_grid()
    terms = model.term_weights(p)
    lam_d = p.lam * p.dist_slit_screen

    oracle = run_oracle(p, screen, spec.nodes_per_slit, spec.route, spec.source_grid)

    with stage("slice"):
        if spec.kind.coincidence:
            what = "coincidence D1&D2 at x1=x2=x" if spec.kind is ScenarioKind.NONLOCAL else "coincidence at x1=x2=x"
            numeric = fields.diagonal_slice(oracle.screen, label=what)
            analytic = model.coincidence_pattern(screen, terms, label=what)
            four = model.four_term_coincidence(screen, terms)
            expected = lam_d / (2 * p.slit_sep)
        else:
            what = "D1 at x1 given D2 at x2=0"
            numeric = fields.conditional_slice(oracle.screen, 0.0, label=what)
            analytic = model.conditional_pattern(screen, terms, label=what)
            four = model.four_term_conditional(screen, terms)
            expected = lam_d / p.slit_sep

    mask = optics.DoubleSlitMask.from_params(p)
    exact = optics.case_weights(oracle.slit_field, mask, total=1.0)
    rq = optics.rq_case_weights(oracle.slit_field, mask, total=1.0)
    gb = propagation.propagate_analytic(p, p.dist_source_slit)
    nominal = propagation.nominal_prefactor(p)
    window = 3 * expected

    metrics: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "scenario": spec.kind.value,
        "geometry": {"scenario": p.scenario.value, **GEOMETRY[spec.kind]},
        "detection_model": "exact position sampling on the detector grid (no resolution or coincidence window)",
        "params": p.to_dict(),
        "derived": {"alpha": p.alpha, "k0": p.k0},
        "regime": regime.to_dict(),
        "detector_grid": screen.to_dict(),
        "expected_spacing": expected,
        "patterns": {
            "analytic": _metrics_or_error(analytic),
            "numeric": _metrics_or_error(numeric),
            "four_term": _metrics_or_error(four),
        },
        "comparison": {
            "window_half_width": window,
            "analytic_vs_numeric": compare(analytic, numeric, window).to_dict(),
            "four_term_vs_numeric": compare(four, numeric, window).to_dict(),
        },
        "term_weights": terms.to_dict(),
        "slit_prefactor": {
            "normalised": {"re": gb.norm.real, "im": gb.norm.imag, "abs": abs(gb.norm)},
            "nominal": {"re": nominal.real, "im": nominal.imag, "abs": abs(nominal)},
        },
        "case_weights": {
            "exact": exact.to_dict(),
            "rq_rectangles": rq.to_dict(),
            "partitions_disagree": bool(abs(exact.p_same - rq.p_same) > 1e-3
                                        or abs(exact.p_diff - rq.p_diff) > 1e-3),
            "gaussian_weight_ratio": terms.weight_diff / terms.weight_same,
        },
        "oracle": {
            "route": oracle.route,
            "source_grid": oracle.source_grid.to_dict() if oracle.source_grid else None,
            "aperture_grid": oracle.slit_field.grid1.to_dict(),
            "transmitted": fields.norm2(oracle.masked),
        },
    }
    if audit:
        metrics["spread_audit"] = spread_audit(p)
    return Report(spec, analytic, numeric, four, metrics, oracle if keep_fields else None)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    report: Report | None
    error: str | None = None


@dataclass(frozen=True)
class SweepReport:
    sweep: Sweep
    points: tuple[SweepPoint, ...]

    def summary(self) -> list[dict[str, Any]]:
        rows = []
        for pt in self.points:
            row: dict[str, Any] = {self.sweep.param: pt.value}
            if pt.report is None:
                row["error"] = pt.error
            else:
                m = pt.report.metrics
                num = m["patterns"]["numeric"]
                ana = m["patterns"]["analytic"]
                cw = m["case_weights"]["exact"]
                row.update({
                    "spacing_expected": m["expected_spacing"],
                    "spacing_analytic": ana.get("spacing"),
                    "spacing_numeric": num.get("spacing"),
                    "visibility_numeric": num.get("visibility"),
                    "p_same": cw["p_same"],
                    "p_diff": cw["p_diff"],
                    "p_diff_over_p_same": cw["ratio"],
                    "l2_err": m["comparison"]["analytic_vs_numeric"]["l2_err"],
                    "error": None,
                })
            rows.append(row)
        return rows


def point_spec(spec: ScenarioSpec, value: float) -> ScenarioSpec:
    return replace(spec, params=spec.params.with_(**{spec.sweep.param: value}), sweep=None)


def _run_point(spec: ScenarioSpec, value: float, audit: bool) -> SweepPoint:
    try:
        return SweepPoint(value, run_scenario(point_spec(spec, value), audit=audit))
    except BiphotonError as exc:
        return SweepPoint(value, None, f"{type(exc).__name__}: {exc}")


def run_sweep(spec: ScenarioSpec, jobs: int = 1, audit: bool = False) -> SweepReport:
    """Run every sweep value independently; failures are recorded per point."""
    if spec.sweep is None:
        raise ConfigError("run_sweep needs a spec with a sweep")
    if len(spec.sweep.values) < 2:
        raise ConfigError("a sweep needs at least two values")
    # Invalid combinations (e.g. slit_width >= slit_sep) are config errors, not point failures.
    for v in spec.sweep.values:
        point_spec(spec, v)
    values = spec.sweep.values
    if jobs <= 1:
        points = [_run_point(spec, v, audit) for v in values]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_run_point, [spec] * len(values), values, [audit] * len(values)))
    return SweepReport(spec.sweep, tuple(points))

