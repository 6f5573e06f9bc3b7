"""``simulate``: run a scenario or sweep from a JSON config and write CSV, SVG and JSON.

Exit codes: 0 success, 1 configuration error, 2 numeric failure,
3 acceptance failure (``--check``).
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import acceptance
from .errors import ConfigError, NumericError
from .output import atomic_write, pattern_csv, pattern_svg, rows_csv, to_json
from .pipeline import Report, ScenarioKind, ScenarioSpec, Sweep, SweepReport, run_scenario, run_sweep

log = logging.getLogger("biphoton")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="simulate",
        description="Entangled-photon double-slit simulation: closed-form laws against a numeric oracle.",
    )
    ap.add_argument("--config", type=Path, help="scenario config (JSON, see configs/)")
    ap.add_argument("--scenario", choices=[k.value for k in ScenarioKind],
                    help="override the scenario named in the config")
    ap.add_argument("--sweep", metavar="NAME=V1,V2,...", help="override or add a parameter sweep")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    ap.add_argument("--jobs", type=int, default=1, help="concurrent sweep points (default: 1)")
    ap.add_argument("--check", action="store_true",
                    help="run the acceptance criteria and exit 3 if any fails; uses the config's "
                         "params when --config is given, the defaults otherwise")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def load_spec(args: argparse.Namespace) -> ScenarioSpec:
    spec = ScenarioSpec.from_json(args.config) if args.config else ScenarioSpec()
    if args.scenario:
        spec = replace(spec, kind=ScenarioKind(args.scenario))
    if args.sweep:
        spec = replace(spec, sweep=Sweep.parse(args.sweep))
    return spec


def write_report(report: Report, outdir: Path) -> list[Path]:
    """Write the outputs requested by the report's spec into ``outdir``."""
    written = []
    if "csv" in report.spec.outputs:
        written.append(atomic_write(outdir / "pattern.csv", pattern_csv(report.analytic, report.numeric)))
    if "svg" in report.spec.outputs:
        svg = pattern_svg([(report.analytic, "solid"), (report.numeric, "dotted")], title=report.label)
        written.append(atomic_write(outdir / "plot.svg", svg))
    if "report" in report.spec.outputs:
        written.append(atomic_write(outdir / "report.json", to_json(report.to_dict())))
    return written


def write_sweep(sweep: SweepReport, outdir: Path) -> list[Path]:
    written = []
    for pt in sweep.points:
        if pt.report is not None:
            written += write_report(pt.report, outdir / f"{sweep.sweep.param}={pt.value:g}")
    rows = sweep.summary()
    written.append(atomic_write(outdir / "summary.csv", rows_csv(rows)))
    written.append(atomic_write(outdir / "summary.json", to_json(
        {"sweep": {"param": sweep.sweep.param, "values": list(sweep.sweep.values)}, "points": rows})))
    return written


def _check(spec: ScenarioSpec | None) -> int:
    params = spec.params if spec is not None else acceptance.DEFAULTS
    results = acceptance.run_all(params)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return EXIT_CHECK if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.check:
            return _check(load_spec(args) if args.config else None)
        spec = load_spec(args)
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        outdir = args.out / spec.kind.value
        if spec.sweep is not None:
            sweep = run_sweep(spec, jobs=args.jobs)
            written = write_sweep(sweep, outdir)
            for pt in sweep.points:
                if pt.error:
                    log.warning("%s=%g failed: %s", spec.sweep.param, pt.value, pt.error)
            if all(pt.error for pt in sweep.points):
                print("numeric failure: every sweep point failed", file=sys.stderr)
                return EXIT_NUMERIC
        else:
            written = write_report(run_scenario(spec), outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
