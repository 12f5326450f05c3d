"""Command-line front end: every experiment, explicit seeds, stable output.

Exit codes: 0 success, 2 parameter/usage error, 3 runtime budget exceeded.
Output is CSV (default) or JSON, written to --output or standard output;
reruns with identical flags and seed are byte-identical regardless of
--threads, which affects scheduling only and is excluded from the JSON
config echo.
"""

from __future__ import annotations

import argparse
import sys

from .baselines import JLParams
from .cap_protocol import CapParams, theta_for_error
from .errors import BudgetExceededError, InvalidParameterError
from .experiments import (
    MODELS,
    OnticParams,
    cost_curve,
    error_sweep,
    fc_suite,
    gap_report,
    jl_suite,
    render_csv,
    render_json,
    simulate_pairs,
)

SIMULATE_COLUMNS = [
    "pair",
    "dim",
    "born_prob",
    "est_mean",
    "ci_low",
    "ci_high",
    "trials",
    "model_delta",
]
ERROR_SWEEP_COLUMNS = [
    "dim",
    "theta_c",
    "valid",
    "delta1",
    "delta2",
    "dev_aligned",
    "sigma_aligned",
    "aligned_ok",
    "dev_perp",
    "sigma_perp",
    "perp_ok",
    "max_random_dev",
    "random_bound",
    "random_ok",
]
COST_CURVE_COLUMNS = [
    "dim",
    "theta_c",
    "valid",
    "tan2",
    "delta1",
    "delta2",
    "mutual_info_bits",
    "asym_cost_bits",
    "one_shot_upper_bits",
    "one_shot_general_upper_bits",
]
GAP_COLUMNS = [
    "n",
    "dim",
    "admissible",
    "weak_bits",
    "strong_bits",
    "ratio",
    "weak_rel_change",
]
FC_RUN_COLUMNS = [
    "dim",
    "theta_c",
    "trials",
    "prob_accept",
    "golomb_m",
    "mutual_info_bits",
    "empirical_entropy_bits",
    "entropy_upper_bits",
    "mean_code_len_bits",
    "mean_index",
    "entropy_ok",
    "code_len_ok",
    "chi2_stat",
    "chi2_critical",
    "chi2_pass",
]
JL_SWEEP_COLUMNS = ["dim", "subdim", "trials", "rms_error", "rms_se", "fit_slope"]


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", metavar="PATH", help="write results to PATH instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: all cores); never affects output bytes",
    )


def _add_dim_flags(parser: argparse.ArgumentParser, repeatable: bool = False) -> None:
    group = parser.add_mutually_exclusive_group()
    if repeatable:
        group.add_argument(
            "--dim", type=int, action="append", help="Hilbert dimension (repeatable)"
        )
        group.add_argument(
            "-n", "--qubits", type=int, action="append", help="qubit count (repeatable)"
        )
    else:
        group.add_argument("--dim", type=int, help="Hilbert-space dimension N")
        group.add_argument("-n", "--qubits", type=int, help="qubit count (N = 2^n)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capsim",
        description="Classical simulation of quantum communication with "
        "a two-outcome projective measurement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="estimate outcome probabilities for random state pairs")
    p.add_argument("--model", choices=MODELS, required=True)
    _add_dim_flags(p)
    angle = p.add_mutually_exclusive_group()
    angle.add_argument("--theta-c", type=float, help="cap half-angle in radians")
    angle.add_argument("--delta", type=float, help="worst-case error target")
    p.add_argument("--pairs", type=int, default=1, help="number of random (psi, phi) pairs")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--ns", type=int, action="append", help="projection subdimension (jl model)")
    p.add_argument("--net-size", type=int, default=256, help="codebook size (jl model)")
    p.add_argument(
        "--codebook-size", type=int, default=256, help="shared codebook size (ontic model)"
    )
    _add_output_flags(p)

    p = sub.add_parser("error-sweep", help="Monte Carlo deviations vs analytic error maxima")
    _add_dim_flags(p, repeatable=True)
    p.add_argument("--theta-c", type=float, action="append", required=True)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--random-phis", type=int, default=0)
    p.add_argument("--random-phi-trials", type=int, default=None)
    _add_output_flags(p)

    p = sub.add_parser("cost-curve", help="analytic error and communication-cost figures")
    _add_dim_flags(p)
    angle = p.add_mutually_exclusive_group(required=True)
    angle.add_argument("--theta-c", type=float, action="append")
    angle.add_argument("--delta", type=float, action="append")
    _add_output_flags(p)

    p = sub.add_parser("gap", help="weak vs strong cost table over qubit counts")
    p.add_argument("-n", "--qubits", type=int, required=True, help="maximum qubit count")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=float, default=5.0)
    _add_output_flags(p)

    p = sub.add_parser("fc-run", help="finite-communication cost experiment")
    _add_dim_flags(p)
    angle = p.add_mutually_exclusive_group()
    angle.add_argument("--theta-c", type=float)
    angle.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int, default=100000)
    _add_output_flags(p)

    p = sub.add_parser("jl-sweep", help="projection-noise scaling measurement")
    _add_dim_flags(p)
    p.add_argument("--ns", type=int, action="append", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--pair-fidelity", type=float, default=0.5)
    _add_output_flags(p)

    return parser


def _resolve_dim(args, default: int | None = None) -> int:
    if getattr(args, "dim", None) is not None:
        return args.dim
    if getattr(args, "qubits", None) is not None:
        if args.qubits < 1:
            raise InvalidParameterError(f"--qubits must be >= 1, got {args.qubits}")
        return 2**args.qubits
    if default is not None:
        return default
    raise InvalidParameterError("--dim or --qubits is required")


def _resolve_cap_params(args, dim: int) -> CapParams:
    if args.theta_c is None and args.delta is None:
        raise InvalidParameterError("--theta-c or --delta is required for cap protocols")
    if args.delta is not None:
        return CapParams(dim, theta_for_error(dim, args.delta))
    return CapParams(dim, args.theta_c)


def _run_simulate(args):
    model = args.model
    config = {"model": model, "pairs": args.pairs, "trials": args.trials, "seed": args.seed}
    if model == "ks-qubit":
        dim = _resolve_dim(args, default=2)
        if dim != 2:
            raise InvalidParameterError("ks-qubit model requires dim 2")
        if args.theta_c is not None or args.delta is not None:
            raise InvalidParameterError("ks-qubit model takes no --theta-c/--delta")
        params = None
    elif model in ("cap", "cap-fc"):
        dim = _resolve_dim(args)
        params = _resolve_cap_params(args, dim)
        config["theta_c"] = params.theta_c
    elif model == "jl":
        dim = _resolve_dim(args)
        if not args.ns or len(args.ns) != 1:
            raise InvalidParameterError("jl model requires exactly one --ns")
        params = JLParams(dim=dim, subdim=args.ns[0], net_size=args.net_size)
        config.update(ns=args.ns[0], net_size=args.net_size)
    else:  # ontic
        dim = _resolve_dim(args)
        params = OnticParams(dim=dim, codebook_size=args.codebook_size)
        config["codebook_size"] = args.codebook_size
    config["dim"] = dim
    rows = simulate_pairs(
        model, dim, params, args.pairs, args.trials, args.seed, args.threads
    )
    return "simulate", config, SIMULATE_COLUMNS, rows


def _run_error_sweep(args):
    if args.dim:
        dims = args.dim
    elif args.qubits:
        dims = [2**n for n in args.qubits]
    else:
        raise InvalidParameterError("--dim or --qubits is required")
    rows = error_sweep(
        dims,
        args.theta_c,
        args.trials,
        args.seed,
        random_phis=args.random_phis,
        random_phi_trials=args.random_phi_trials,
        threads=args.threads,
    )
    config = {
        "dims": dims,
        "thetas": args.theta_c,
        "trials": args.trials,
        "random_phis": args.random_phis,
        "seed": args.seed,
    }
    return "error-sweep", config, ERROR_SWEEP_COLUMNS, rows


def _run_cost_curve(args):
    dim = _resolve_dim(args)
    if args.delta is not None:
        thetas = [theta_for_error(dim, d) for d in args.delta]
    else:
        thetas = args.theta_c
    rows = cost_curve(dim, thetas)
    config = {"dim": dim, "thetas": thetas, "seed": args.seed}
    return "cost-curve", config, COST_CURVE_COLUMNS, rows


def _run_gap(args):
    rows = gap_report(args.qubits, args.delta, args.alpha)
    config = {"n_max": args.qubits, "delta": args.delta, "alpha": args.alpha}
    return "gap", config, GAP_COLUMNS, rows


def _run_fc(args):
    dim = _resolve_dim(args)
    params = _resolve_cap_params(args, dim)
    rows = fc_suite(params, args.trials, args.seed)
    config = {
        "dim": dim,
        "theta_c": params.theta_c,
        "trials": args.trials,
        "seed": args.seed,
    }
    return "fc-run", config, FC_RUN_COLUMNS, rows


def _run_jl_sweep(args):
    dim = _resolve_dim(args)
    rows = jl_suite(dim, args.ns, args.trials, args.seed, args.pair_fidelity)
    config = {
        "dim": dim,
        "subdims": args.ns,
        "trials": args.trials,
        "pair_fidelity": args.pair_fidelity,
        "seed": args.seed,
    }
    return "jl-sweep", config, JL_SWEEP_COLUMNS, rows


_RUNNERS = {
    "simulate": _run_simulate,
    "error-sweep": _run_error_sweep,
    "cost-curve": _run_cost_curve,
    "gap": _run_gap,
    "fc-run": _run_fc,
    "jl-sweep": _run_jl_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        experiment, config, columns, rows = _RUNNERS[args.command](args)
    except BudgetExceededError as exc:
        print(f"capsim: budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (InvalidParameterError, ValueError) as exc:
        print(f"capsim: invalid parameters: {exc}", file=sys.stderr)
        return 2
    if args.format == "json":
        rendered = render_json(experiment, config, columns, rows)
    else:
        rendered = render_csv(columns, rows)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(rendered.encode("utf-8"))
    else:
        sys.stdout.write(rendered)
    return 0


if __name__ == "__main__":
    sys.exit(main())
