"""Command-line interface for dgd_local experiments."""

import argparse
import json
import logging
import sys
import traceback
from typing import (
    Any,
    Callable,
    Optional,
)

from .constants import (
    EQUIV_ITERS,
    TOLERANCES,
)
from .errors import StepsizeError
from .geometry import classify_critical
from .harness import ExperimentConfig
from .harness.experiment import (
    MC_SUMMARY_FILE,
    RESOLVED_CONFIG_FILE,
    SUMMARY_FILE,
    TRACE_FILE,
    monte_carlo,
    prepare_experiment,
    run_experiment,
    write_instance,
)
from .matkit import read_matrix
from .objective import (
    FactorPair,
    lipschitz_Lg,
    local_bounds,
    safe_stepsize,
    stepsize_generic,
    stepsize_mf,
)
from .solvers import (
    RunStatus,
    equivalence_check,
)
from .topology import perturb_row_sums


def _print_json(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2))


def _or_none(fn: Callable[..., float], *args: Any) -> Optional[float]:
    """fn(*args), or None when no stepsize exists."""
    try:
        return fn(*args)
    except StepsizeError:
        return None


# ------------------------------------------------------------------------------
# ---- Subcommands -------------------------------------------------------------
# ------------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    exp = prepare_experiment(args.config)
    out_dir = args.out or exp.config.output_dir
    print(exp.config.describe())
    for path in write_instance(exp, out_dir):
        print(f"    wrote {path}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_file(args.config)
    print(config.describe())

    trace = run_experiment(config)
    final = trace.final
    print(f"Status: {trace.status.value if trace.status else None} after {final.iter} iterations")
    print(f"    f = {final.f_central:.6g}, consensus error = {final.consensus_err:.3e}, "
          f"optimality gap = {final.opt_gap:.3e}")
    print(f"    left B_rho: {trace.left_ball_ever}, descent violations: {trace.descent_violations}")
    for name in (TRACE_FILE, SUMMARY_FILE, RESOLVED_CONFIG_FILE):
        print(f"    wrote {config.output_dir}/{name}")
    return 0 if trace.status == RunStatus.GRAD_TOLERANCE_MET else 1


def cmd_equiv(args: argparse.Namespace) -> int:
    exp = prepare_experiment(args.config)
    mu = exp.stepsize()
    mixing = exp.mixing if args.perturb is None else perturb_row_sums(exp.mixing, args.perturb)
    deviation = equivalence_check(exp.initial_point(), mixing, mu, exp.partition, args.iters)
    _print_json({"max_rel_deviation": deviation})
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    p = FactorPair(read_matrix(args.u), read_matrix(args.v))
    y = read_matrix(args.y)
    verdict = classify_critical(p, y, tol_grad=args.tol_grad, tol_saddle=args.tol_saddle, seed=args.seed)
    _print_json(verdict.to_dict())
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    exp = prepare_experiment(args.config)
    norms = exp.partition.block_norms()
    triples = [local_bounds(exp.rho, y) for y in norms]
    omega = exp.omega
    lipschitz = max(b.l2 for b in triples)

    mu_mf = _or_none(stepsize_mf, exp.rho, omega, norms)
    if exp.config.mu == "auto":
        mu = None if mu_mf is None else safe_stepsize(mu_mf, exp.config.safety)
    else:
        mu = float(exp.config.mu)

    _print_json({
        "l0": [b.l0 for b in triples],
        "l1": [b.l1 for b in triples],
        "l2": [b.l2 for b in triples],
        "omega": omega,
        "lg": None if mu is None else lipschitz_Lg(lipschitz, omega, mu),
        "mu_generic": _or_none(stepsize_generic, lipschitz, omega),
        "mu_mf": mu_mf,
    })
    return 0


def cmd_mc(args: argparse.Namespace) -> int:
    summary = monte_carlo(args.config, trials=args.trials)
    _print_json({key: value for key, value in summary.items() if key != 'per_trial'})
    print(f"Per-trial results in {MC_SUMMARY_FILE}", file=sys.stderr)
    return 0 if summary['grad_tolerance_fraction'] == 1.0 else 1


# ------------------------------------------------------------------------------
# ---- Main entrypoint ---------------------------------------------------------
# ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgd-local",
        description="Simulate DGD+LOCAL for distributed low-rank matrix factorization",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
        Examples:
          dgd-local gen --config ring4.cfg --out data/
          dgd-local run --config ring4.cfg
          dgd-local equiv --config ring4.cfg --iters 200
          dgd-local equiv --config ring4.cfg --perturb 0.9
          dgd-local classify --u U.txt --v V.txt --y Y.txt
          dgd-local bounds --config ring4.cfg
          dgd-local mc --config ring4.cfg --trials 20

        Config names that do not exist on disk are looked up among the bundled
        configs (ring4.cfg).
        """
    )
    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Log debug messages (default level: warning)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Write Y, its column blocks, widths, graph and mixing matrix")
    gen.add_argument("--config", required=True, help="Experiment config file")
    gen.add_argument("--out", help="Output directory (default: output_dir from the config)")
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="Run one experiment; exit 0 iff the gradient tolerance is met")
    run.add_argument("--config", required=True, help="Experiment config file")
    run.set_defaults(func=cmd_run)

    equiv = sub.add_parser("equiv", help="Max relative deviation between DGD+LOCAL and GD on g")
    equiv.add_argument("--config", required=True, help="Experiment config file")
    equiv.add_argument("--iters", type=int, default=EQUIV_ITERS, help=f"Steps (default: {EQUIV_ITERS})")
    equiv.add_argument(
        "--perturb",
        type=float,
        default=None,
        help="Scale the mixing weights so rows sum to this value (negative control)",
    )
    equiv.set_defaults(func=cmd_equiv)

    classify = sub.add_parser("classify", help="Classify (U, V) as GlobalMin, StrictSaddle or NotCritical")
    classify.add_argument("--u", required=True, help="Matrix file holding U")
    classify.add_argument("--v", required=True, help="Matrix file holding V")
    classify.add_argument("--y", required=True, help="Matrix file holding Y")
    classify.add_argument("--tol-grad", type=float, default=None, help="Default: 1e-9 (1 + ||Y||_F)")
    classify.add_argument(
        "--tol-saddle",
        type=float,
        default=TOLERANCES.saddle,
        help=f"Default: {TOLERANCES.saddle:g}",
    )
    classify.add_argument("--seed", type=int, default=0, help="Seed of the eigen-estimate")
    classify.set_defaults(func=cmd_classify)

    bounds = sub.add_parser("bounds", help="Print Lipschitz constants and stepsize bounds as JSON")
    bounds.add_argument("--config", required=True, help="Experiment config file")
    bounds.set_defaults(func=cmd_bounds)

    mc = sub.add_parser("mc", help="Monte-Carlo study over random initializations")
    mc.add_argument("--config", required=True, help="Experiment config file")
    mc.add_argument("--trials", type=int, default=None, help="Default: trials from the config")
    mc.set_defaults(func=cmd_mc)

    return parser


def main(argv: Optional[list[str]] = None) -> None:
    """Main entry point for CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        code = args.func(args)
    except ValueError as e:
        parser.error(str(e))
    except Exception:
        traceback.print_exc()
        sys.exit(1)
    sys.exit(code)


if __name__ == "__main__":
    main()
