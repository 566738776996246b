"""
Command-line surface.

    bbfiber verify    --seq eightstep --terms linear,A,B
    bbfiber verify    --lamb-shift configs/paired_pi.json
    bbfiber simulate  --config configs/paired_pi.json
    bbfiber delta     --n 2 --omega-c 2e13
    bbfiber delta     --curve --n 3 --from 1e10 --to 1e16
    bbfiber estimate  --order bilinear
    bbfiber reproduce [--strict-tol 1e-3] [--list]
    bbfiber search    --targets linear,A --alphabet Pi,Pi1,G,Gd --max-steps 4

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

import argparse
import logging
import sys
from dataclasses import asdict, replace
from typing import Any, Dict, List, Optional, Sequence

from bbfiber import settings
from bbfiber.anchors import HEADER, LIST_HEADER, list_rows, reproduce
from bbfiber.bounds import (
    FIBER_SPEED_M_S,
    BoundQuery,
    SpectralDensity,
    delta_bound,
    figure_curve,
    gamma_for,
)
from bbfiber.calculus import classify, matrix_check
from bbfiber.exceptions import BBFiberError, ConfigError
from bbfiber.estimates import SHIFTERS_PER_SEGMENT, rough_estimate
from bbfiber.hamiltonian import FiberModel
from bbfiber.parser import LiteralParser
from bbfiber.propagator import compare_with_without, lamb_shift_check
from bbfiber.search import search_sequences
from bbfiber.storage import Storage, Sweep, load_run_config, render_csv, render_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SIMULATE_HEADER = ("seed", "epsilon", "g", "tau_s", "bb", "fidelity", "coherence", "purity")
CURVE_HEADER = ("omega_c_rad_s", "delta_m")
DELTA_HEADER = ("n", "alpha", "omega_c_rad_s", "beta_s", "T_s", "gamma", "delta_m")
VERIFY_HEADER = ("term", "status", "weight_re", "weight_im", "matrix_norm")
LAMB_HEADER = ("tau_s", "hermiticity_residual", "purity_change", "overlap_phase", "passed")
SEARCH_HEADER = ("rank", "length", "sequence")


def _emit(args: argparse.Namespace, header: Sequence[str], rows: List[Sequence[Any]]) -> None:
    """Write rows as CSV or as a JSON list of objects, to --output or stdout."""
    if args.format == "json":
        text = render_json([dict(zip(header, row)) for row in rows])
    else:
        text = render_csv(header, rows)
    if args.output:
        path = Storage().write_text(args.output, text)
        logger.info("Wrote %d row(s) to %s", len(rows), path)
    else:
        sys.stdout.write(text)


def cmd_verify(args: argparse.Namespace) -> int:
    if args.lamb_shift:
        return _verify_lamb_shift(args)
    if not args.seq or not args.terms:
        raise ConfigError("verify needs --seq and --terms (or --lamb-shift)")
    sequence = LiteralParser.parse_sequence(args.seq)
    terms = LiteralParser.parse_terms(args.terms)
    report = classify(sequence, terms)

    rows = []
    for verdict in report.verdicts:
        norm = matrix_check(sequence, verdict.term) if args.matrix else ""
        value = verdict.weight.value
        rows.append(
            (verdict.term.label, verdict.status, float(value.real), float(value.imag), norm)
        )
    _emit(args, VERIFY_HEADER, rows)
    return EXIT_OK if report.passed(args.allow_degenerate) else EXIT_FAILED


def _verify_lamb_shift(args: argparse.Namespace) -> int:
    config = load_run_config(args.lamb_shift)
    if config.model is None:
        raise ConfigError(f"{args.lamb_shift} has no model block")
    report = lamb_shift_check(config.model)
    if report.zero_coupling:
        logger.info("Model has no linear coupling; H' vanishes")
    row = (
        config.model.tau_s,
        report.hermiticity_residual,
        report.purity_change,
        report.overlap_phase,
        report.passed,
    )
    _emit(args, LAMB_HEADER, [row])
    return EXIT_OK if report.passed else EXIT_FAILED


def _simulation_model(model: FiberModel, seed: int, eps: float, g: float, tau: float):
    modes = tuple(replace(mode, g_rad_s=g, g2_rad_s=None) for mode in model.bath_modes)
    resized = replace(model, seed=seed, epsilon=eps, bath_modes=modes)
    return resized.with_tau(tau, model.num_segments)


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    if config.model is None:
        raise ConfigError(f"{args.config} has no model block")
    controls = LiteralParser.parse_sequence(config.controls or "omega12")
    sweep = config.sweep or Sweep(
        seeds=(config.seed,),
        epsilon=(config.model.epsilon,),
        g_rad_s=(config.model.bath_modes[0].g_rad_s,),
        tau_s=(config.model.tau_s,),
    )
    if args.format is None:
        args.format = config.format
    if args.output is None:
        args.output = config.output

    rows = []
    for seed, eps, g, tau in sweep.points():
        model = _simulation_model(config.model, seed, eps, g, tau)
        paired = compare_with_without(model, controls)
        for flag, result in ((1, paired.with_bb), (0, paired.without_bb)):
            rows.append(
                (seed, eps, g, tau, flag, result.fidelity, result.coherence, result.purity)
            )
        logger.debug("seed=%d eps=%g g=%g tau=%g ratio=%.3e", seed, eps, g, tau,
                     paired.deficit_ratio)
    _emit(args, SIMULATE_HEADER, rows)
    return EXIT_OK


def _delta_inputs(args: argparse.Namespace):
    if args.config:
        config = load_run_config(args.config)
        if config.spectral_density is None or config.bound_query is None:
            raise ConfigError(f"{args.config} needs spectral_density and bound_query blocks")
        return config.spectral_density, config.bound_query
    if args.n is None or (args.omega_c is None and not args.curve):
        raise ConfigError("delta needs --n and --omega-c (or --config)")
    query = BoundQuery(args.delta, args.length, args.speed, args.time)
    omega_c = args.omega_c if args.omega_c is not None else 1.0
    return SpectralDensity(args.n, args.alpha, omega_c, args.beta), query


def cmd_delta(args: argparse.Namespace) -> int:
    sd, query = _delta_inputs(args)
    if args.curve:
        rows = figure_curve(
            sd.n, args.omega_from, args.omega_to, args.points, query, alpha=sd.alpha
        )
        _emit(args, CURVE_HEADER, rows)
        return EXIT_OK
    delta_m = delta_bound(sd, query, method=args.method)
    row = (sd.n, sd.alpha, sd.omega_c_rad_s, sd.beta_s, query.T, gamma_for(sd, query.T), delta_m)
    _emit(args, DELTA_HEADER, [row])
    return EXIT_OK


def cmd_estimate(args: argparse.Namespace) -> int:
    estimate = rough_estimate(args.order, args.target, args.transmission, args.span)
    payload: Dict[str, Any] = asdict(estimate)
    payload["residual_error"] = estimate.residual_error
    text = render_json(payload)
    if args.format == "csv":
        text = render_csv(tuple(sorted(payload)), [[payload[k] for k in sorted(payload)]])
    if args.output:
        Storage().write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    keys = [k for k in args.rows.split(",") if k] if args.rows else None
    if args.list:
        _emit(args, LIST_HEADER, list_rows(keys))
        return EXIT_OK
    results = reproduce(keys, args.strict_tol)
    _emit(args, HEADER, [result.as_tuple() for result in results])
    failed = [result.row.key for result in results if not result.passed]
    if failed:
        logger.warning("Failed anchor rows: %s", ", ".join(failed))
        return EXIT_FAILED
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    targets = LiteralParser.parse_terms(args.targets)
    alphabet = LiteralParser.parse_alphabet(args.alphabet)
    result = search_sequences(
        targets,
        alphabet,
        args.max_steps,
        max_states=args.max_states,
        require_cyclic=not args.allow_open,
        allow_degenerate=args.allow_degenerate,
    )
    if result.truncated:
        logger.warning("Search truncated after %d states", result.explored_states)
    rows = [(i + 1, result.length, seq.literal) for i, seq in enumerate(result.sequences)]
    _emit(args, SEARCH_HEADER, rows)
    return EXIT_OK if result.found else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="log at DEBUG level")
    common.add_argument("--output", "-o", default=None, help="write results to this file")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    parser = argparse.ArgumentParser(
        prog="bbfiber", description="Spatial bang-bang decoupling of photon noise in fibers."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common], help="check term elimination")
    verify.add_argument("--seq", default=None, help="sequence literal or name")
    verify.add_argument("--terms", default=None, help="term literal or set names")
    verify.add_argument("--matrix", action="store_true", help="add the Fock-matrix check")
    verify.add_argument("--allow-degenerate", action="store_true")
    verify.add_argument(
        "--lamb-shift", default=None, metavar="CONFIG", help="check H' on a config's model"
    )
    verify.set_defaults(handler=cmd_verify)

    simulate = commands.add_parser("simulate", parents=[common], help="propagate a fiber")
    simulate.add_argument("--config", required=True, help="run config JSON")
    simulate.set_defaults(handler=cmd_simulate)

    delta = commands.add_parser("delta", parents=[common], help="segment length bound")
    delta.add_argument("--config", default=None)
    delta.add_argument("--n", type=int, default=None)
    delta.add_argument("--omega-c", type=float, default=None)
    delta.add_argument("--alpha", type=float, default=1.0)
    delta.add_argument("--beta", type=float, default=float("inf"), help="inverse temperature")
    delta.add_argument("--delta", type=float, default=1e-4, help="tolerated coherence loss")
    delta.add_argument("--length", type=float, default=1000.0, help="link length in m")
    delta.add_argument("--speed", type=float, default=FIBER_SPEED_M_S, help="speed in m/s")
    delta.add_argument("--time", type=float, default=None, help="override T in s")
    delta.add_argument("--method", choices=("closed", "implicit"), default="closed")
    delta.add_argument("--curve", action="store_true")
    delta.add_argument("--from", dest="omega_from", type=float, default=1e10)
    delta.add_argument("--to", dest="omega_to", type=float, default=1e16)
    delta.add_argument("--points", type=int, default=61)
    delta.set_defaults(handler=cmd_delta)

    estimate = commands.add_parser("estimate", parents=[common], help="rough shifter count")
    estimate.add_argument("--order", choices=sorted(SHIFTERS_PER_SEGMENT), default="linear")
    estimate.add_argument("--target", type=float, default=1e-4)
    estimate.add_argument("--transmission", type=float, default=0.95)
    estimate.add_argument("--span", type=float, default=1000.0, help="span in m")
    estimate.set_defaults(handler=cmd_estimate)

    repro = commands.add_parser("reproduce", parents=[common], help="recompute anchor values")
    repro.add_argument("--strict-tol", type=float, default=None)
    repro.add_argument("--rows", default=None, help="comma-separated row keys")
    repro.add_argument("--list", action="store_true", help="list rows without computing")
    repro.set_defaults(handler=cmd_reproduce)

    search = commands.add_parser("search", parents=[common], help="find shortest sequences")
    search.add_argument("--targets", required=True)
    search.add_argument("--alphabet", required=True)
    search.add_argument("--max-steps", type=int, default=8)
    search.add_argument("--max-states", type=int, default=None)
    search.add_argument("--allow-open", action="store_true", help="accept non-cyclic results")
    search.add_argument("--allow-degenerate", action="store_true")
    search.set_defaults(handler=cmd_search)
    return parser


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if args.format is None and args.command != "simulate":
        args.format = "json" if args.command == "estimate" else "csv"
    try:
        return args.handler(args)
    except BBFiberError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
