"""Command line entry point: ``erkn-wave <subcommand> [options]``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure in a
gating check, 3 property-probe mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, probes
from .config import ConfigError, ExperimentConfig, load_config
from .integrators import exact_linear_flow, get_scheme, scheme_registry
from .problem import PRNG_NAME, SeededRandom, make_initial_state, make_problem
from .spectral import pair_norm

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_PROBE = 3

CONVERGENCE_HEADER = [
    "scheme", "alpha", "h", "n_steps", "err_y", "err_ydot", "fit_order_y", "fit_order_ydot",
    "seed", "prng", "K", "p", "s", "discretization",
]
FILTER_HEADER = ["scheme", "beta", "equation", "measured_c", "grid_min", "grid_max", "grid_points"]
PROBE_HEADER = [
    "scheme", "symmetry_defect", "symplecticity_defect", "declared_symmetric", "measured_symmetric",
    "declared_symplectic", "measured_symplectic", "pass",
]
REFERENCE_HEADER = ["check", "value", "tolerance", "pass"]

log = logging.getLogger("erkn_wave")


def fmt(x) -> str:
    """Round-trip-safe float formatting (17 significant digits)."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _metadata(config: ExperimentConfig) -> str:
    return f"# config_sha256={config.hash()} prng={PRNG_NAME} seed={config.seed}\n"


def _write_csv(path: str | None, config: ExperimentConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write(_metadata(config))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text


def convergence_rows(config: ExperimentConfig, result: analysis.StudyResult) -> list[list]:
    rows = []
    for curve in result.curves:
        for smp in curve.samples:
            rows.append([
                curve.scheme, curve.alpha, smp.h, smp.n_steps, smp.err_y, smp.err_ydot,
                curve.fitted_order_y, curve.fitted_order_ydot,
                config.seed, PRNG_NAME, config.K, config.p, config.s, config.discretization,
            ])
    rows.sort(key=lambda r: (r[0], -r[1], -r[2]))
    return rows


def filter_rows(schemes, betas, xi_grid=None) -> list[list]:
    rows = []
    for sid in schemes:
        for rep in analysis.check_filter_bounds(get_scheme(sid), betas, xi_grid):
            rows.append([rep.scheme, rep.beta, rep.equation, rep.measured_c, rep.grid_min, rep.grid_max, rep.grid_points])
    return rows


def _config_from_args(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "scheme", None):
        config = replace(config, schemes=tuple(args.scheme))
    if getattr(args, "output", None):
        config = replace(config, output=args.output)
    return config.validate()


def cmd_converge(args) -> int:
    config = _config_from_args(args)
    result = analysis.run_study(config, threads=args.threads)
    out = config.output or "convergence.csv"
    _write_csv(out, config, CONVERGENCE_HEADER, convergence_rows(config, result))
    print(f"{'scheme':<8}{'alpha':>7}{'order_y':>10}{'order_ydot':>12}{'max |||.|||_0 ratio':>22}")
    for c in result.curves:
        print(f"{c.scheme:<8}{c.alpha:>7.2f}{c.fitted_order_y:>10.3f}{c.fitted_order_ydot:>12.3f}{c.max_norm_ratio:>22.4f}")
    for (sid, h), why in sorted(result.failures.items()):
        print(f"blow-up: {sid} h={h:g}: {why}", file=sys.stderr)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_filters(args) -> int:
    config = _config_from_args(args)
    if args.config is None and not args.scheme:
        config = replace(config, schemes=tuple(s.id for s in scheme_registry()))
    rows = filter_rows(config.schemes, config.betas)
    out = config.output or None
    _write_csv(out, config, FILTER_HEADER, rows)
    print(f"{'scheme':<8}{'beta':>6}{'bound':>13}{'measured_c':>14}")
    for r in rows:
        print(f"{r[0]:<8}{r[1]:>6.2f}{r[2]:>13}{r[3]:>14.6g}")
    if out:
        print(f"wrote {out}")
    return EXIT_OK if all(math.isfinite(r[3]) for r in rows) else EXIT_NUMERICAL


def cmd_props(args) -> int:
    ids = args.scheme or [s.id for s in scheme_registry()]
    try:
        schemes = [get_scheme(i) for i in ids]
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    ok = True
    for s in schemes:
        rep = probes.property_probe(s)
        ok &= rep.passed
        rows.append([
            rep.scheme, rep.symmetry_defect, rep.symplecticity_defect, rep.declared_symmetric,
            rep.measured_symmetric, rep.declared_symplectic, rep.measured_symplectic, rep.passed,
        ])
        print(
            f"{rep.scheme}: symmetry defect {rep.symmetry_defect:.3e} "
            f"(measured {_word(rep.measured_symmetric, 'symmetric')}, declared {_word(rep.declared_symmetric, 'symmetric')}); "
            f"symplecticity defect {rep.symplecticity_defect:.3e} "
            f"(measured {_word(rep.measured_symplectic, 'symplectic')}, declared {_word(rep.declared_symplectic, 'symplectic')}) "
            f"-> {'pass' if rep.passed else 'FAIL'}"
        )
    if args.output:
        _write_csv(args.output, replace(ExperimentConfig(), schemes=tuple(ids)), PROBE_HEADER, rows)
    return EXIT_OK if ok else EXIT_PROBE


def _word(flag, name):
    if flag is None:
        return "inconclusive"
    return name if flag else f"non-{name}"


def cmd_reference_check(args) -> int:
    config = _config_from_args(args)
    T = config.t_end
    e = config.h_ref_exponent
    lin = make_problem(config.discretization, config.K, config.p, linear=True)
    st0 = make_initial_state(lin, SeededRandom(config.seed, config.decay_y, config.decay_ydot, config.amplitude))
    exact = exact_linear_flow(st0, lin.fs, T)
    linear_err = pair_norm(analysis.reference_solution(lin, st0, T, e) - exact, 0.0, lin.fs)
    prob = make_problem(config.discretization, config.K, config.p)
    try:
        drift = analysis.reference_self_consistency(prob, st0, T, e)
    except analysis.BlowUpError as exc:
        print(f"reference blew up: {exc}", file=sys.stderr)
        drift = math.inf
    rows = [
        ["linear_exactness", linear_err, 1e-10, linear_err <= 1e-10],
        ["halving_self_consistency", drift, 1e-9, drift <= 1e-9],
    ]
    _write_csv(config.output or None, config, REFERENCE_HEADER, rows)
    for r in rows:
        print(f"{r[0]:<26}{r[1]:>12.3e}  tol {r[2]:.0e}  {'pass' if r[3] else 'FAIL'}")
    return EXIT_OK if all(r[3] for r in rows) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erkn-wave", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--output", help="CSV output path")
        p.add_argument("--scheme", action="append", help="scheme id (repeatable)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes, 0 = all cores (default: $ERKN_WAVE_THREADS or 1)")

    common(sub.add_parser("converge", help="convergence study, one CSV row per (scheme, alpha, h)"))
    common(sub.add_parser("filters", help="filter-function bound constants"))
    common(sub.add_parser("props", help="symmetry and symplecticity probes"), config=False)
    common(sub.add_parser("reference-check", help="validate the reference integrator"))
    return parser


COMMANDS = {
    "converge": cmd_converge,
    "filters": cmd_filters,
    "props": cmd_props,
    "reference-check": cmd_reference_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None and os.environ.get("ERKN_WAVE_THREADS"):
        try:
            args.threads = int(os.environ["ERKN_WAVE_THREADS"])
        except ValueError:
            print("error: ERKN_WAVE_THREADS must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
