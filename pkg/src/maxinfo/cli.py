"""Command-line front end.

Exit status: 0 success, 2 parameter or hypothesis violation, 3 enumeration
cap exceeded, 1 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import attack, bounds, codes, estimator, fdr, mechanisms
from .errors import ConfigInvalid, MaxInfoError, ParamOutOfRange, ParseError
from .serialize import exact_or_float, load_joint_csv, load_kernel_csv, render_report

THEOREMS = (
    "pure",
    "pure-product",
    "approx-product",
    "description-length",
    "mi-to-maxinfo",
    "maxinfo-to-mi",
    "dp-to-mi",
)


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigInvalid(f"{args.theorem} needs {', '.join(missing)}")


BOUND_FIELDS = ("theorem", "epsilon", "delta", "n", "beta", "r_bits", "m_bits", "k", "sigma_size", "x_size")


def _merge_params(args) -> None:
    """Fill unset bound flags from a JSON object given inline or as a file path."""
    if not args.params:
        return
    text = args.params
    if not text.lstrip().startswith("{"):
        if not os.path.exists(text):
            raise ParseError(f"--params is neither a JSON object nor a file: {text}")
        with open(text) as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid --params JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(obj, dict):
        raise ConfigInvalid("--params must be a JSON object")
    unknown = sorted(set(obj) - set(BOUND_FIELDS))
    if unknown:
        raise ConfigInvalid(f"unknown bound parameters: {', '.join(unknown)}")
    for key, value in obj.items():
        if getattr(args, key) is None:
            setattr(args, key, value.replace("_", "-") if key == "theorem" else value)


def cmd_bound(args) -> dict:
    _merge_params(args)
    t = args.theorem
    if t not in THEOREMS:
        raise ConfigInvalid(f"--theorem must be one of {', '.join(THEOREMS)}")
    if t == "pure":
        _require(args, "epsilon", "n")
        return bounds.pure_dp_bound(args.epsilon, args.n).to_dict()
    if t == "pure-product":
        _require(args, "epsilon", "n", "beta")
        return bounds.pure_dp_product_bound(args.epsilon, args.n, args.beta).to_dict()
    if t == "approx-product":
        _require(args, "epsilon", "delta", "n")
        return bounds.approx_dp_product_bound(bounds.PrivacyParams(args.epsilon, args.delta), args.n).to_dict()
    if t == "description-length":
        _require(args, "r_bits", "beta")
        return bounds.description_length_bound(args.r_bits, args.beta).to_dict()
    if t == "mi-to-maxinfo":
        _require(args, "m_bits", "k")
        return bounds.mi_to_maxinfo(args.m_bits, args.k).to_dict()
    if t == "maxinfo-to-mi":
        _require(args, "k", "beta", "sigma_size")
        value = bounds.maxinfo_to_mi(args.k, args.beta, args.sigma_size)
        return {"mutual_information": value, "units": "mixed", "provenance": "maxinfo_to_mi"}
    _require(args, "epsilon", "n", "x_size")
    value = bounds.dp_to_mi_bound(bounds.PrivacyParams(args.epsilon, args.delta or 0.0), args.n, args.x_size)
    return {"mutual_information": value, "provenance": "dp_to_mi", "constants": "all set to 1"}


def cmd_correct(args) -> dict:
    if args.method == "maxinfo":
        if args.k is None or args.beta is None:
            raise ConfigInvalid("maxinfo correction needs --k and --beta")
        gamma = bounds.pvalue_correction(args.k, args.beta, args.alpha)
    else:
        if args.m_bits is None:
            raise ConfigInvalid(f"{args.method} correction needs --m-bits")
        fn = bounds.mi_pvalue_correction if args.method == "mi" else bounds.rz_pvalue_correction
        gamma = fn(args.m_bits, args.alpha)
    return {"gamma": gamma, "alpha": args.alpha, "method": args.method}


def cmd_estimate(args) -> dict:
    joint = load_joint_csv(args.joint, rational=args.rational)
    result = estimator.approx_max_info(joint, args.beta)
    out = result.to_dict()
    out["backend"] = exact_or_float(joint)
    out["mutual_information_bits"] = estimator.mutual_information(joint)
    if args.check_k is not None:
        out["check"] = estimator.check_bound(joint, args.check_k, args.check_beta or 0.0).to_dict()
    return out


def cmd_verify_dp(args) -> dict:
    if args.kernel:
        marginal = tuple(args.marginal.split(",")) if args.marginal else None
        kernel = load_kernel_csv(args.kernel, marginal, rational=args.rational)
    elif args.mechanism == "rr":
        kernel = mechanisms.rr_kernel(args.mech_epsilon or args.epsilon, args.n)
    elif args.mechanism == "geometric":
        truncation = args.truncation if args.truncation is not None else args.n
        kernel = mechanisms.geometric_count_kernel(args.mech_epsilon or args.epsilon, args.n, truncation)
    else:
        raise ConfigInvalid("give --kernel or --mechanism")
    return mechanisms.verify_dp(kernel, args.epsilon, args.delta).to_dict()


def _demo_code(args, rng) -> codes.ParityCheckCode:
    if args.code_file:
        code = codes.load_code(args.code_file)
        return code if code.verified else codes.verify_code(code)
    if args.n is None or args.dmin is None:
        raise ConfigInvalid("demo mode needs --code-file or both --n and --dmin")
    return codes.random_code_with_distance(args.n, args.dmin, args.max_tries, rng, r=args.r, mode="demo")


def cmd_attack(args) -> dict:
    rng = np.random.default_rng([args.seed, 0])
    if args.mode == "theorem":
        if args.epsilon is None or args.delta is None or args.n is None:
            raise ConfigInvalid("theorem mode needs --epsilon, --delta and --n")
        params = attack.derive_params(args.epsilon, args.delta, args.n)
        code = codes.load_code(args.code_file) if args.code_file else None
        if args.trials == 0 or code is None:
            report = attack.analytic_report(params, code, args.seed).to_dict()
            report["verification_feasible"] = params.verification_feasible
            return report
        return attack.run_composition_trials(params, code, args.trials, args.seed, args.workers).to_dict()
    if args.epsilon is None:
        raise ConfigInvalid("demo mode needs --epsilon")
    code = _demo_code(args, rng)
    params = attack.demo_params(code, args.epsilon, args.delta, args.w)
    if args.syndrome is not None:
        a = codes.BitString.from_str(args.syndrome)
        report = attack.run_fixed_syndrome_trials(params, code, a, args.trials, args.seed, args.workers)
        out = report.to_dict()
    else:
        report = attack.run_composition_trials(params, code, args.trials, args.seed, args.workers)
        out = report.to_dict()
        if code.n <= 20 and args.trials:
            out["blowup_bits"] = attack.blowup_bits(code.n, report.success_rate)
    out["code"] = code.to_json()
    return out


def cmd_simulate(args):
    selector = args.selector.replace("-", "_")
    config = fdr.SimConfig(
        n=args.n,
        m=args.m,
        trials=args.trials,
        alpha=args.alpha,
        selector=selector,
        epsilon=args.epsilon,
        seed=args.seed,
        d=args.d,
        beta_fraction=args.beta_fraction,
        workers=args.workers,
    )
    report = fdr.run_fdr_experiment(config)
    return report.to_dict(), report.rows()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxinfo", description="Max-information bounds, estimators and experiments.")
    parser.add_argument("--output", "-o", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    # Output flags are accepted before or after the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common], help="evaluate a closed-form bound")
    p.add_argument("--theorem", choices=THEOREMS)
    p.add_argument("--params", help="JSON parameter object, inline or as a file path")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--r-bits", type=float)
    p.add_argument("--m-bits", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--sigma-size", type=int)
    p.add_argument("--x-size", type=int)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("correct", parents=[common], help="corrected significance threshold")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--m-bits", type=float)
    p.add_argument("--method", choices=("maxinfo", "mi", "rz"), default="maxinfo")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("estimate", parents=[common], help="exact approximate max-information of a joint CSV")
    p.add_argument("--joint", required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--rational", action="store_true", help="parse probabilities as exact fractions")
    p.add_argument("--check-k", type=float)
    p.add_argument("--check-beta", type=float)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify-dp", parents=[common], help="exhaustive (epsilon, delta)-DP check of a kernel")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--kernel")
    p.add_argument("--marginal", help="comma-separated record alphabet, in order")
    p.add_argument("--rational", action="store_true")
    p.add_argument("--mechanism", choices=("rr", "geometric"))
    p.add_argument("--mech-epsilon", type=float, help="privacy parameter of the built-in mechanism")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--truncation", type=int)
    p.set_defaults(func=cmd_verify_dp)

    p = sub.add_parser("attack", parents=[common], help="syndrome-then-decode reconstruction experiment")
    p.add_argument("--mode", choices=("theorem", "demo"), default="demo")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--dmin", type=int)
    p.add_argument("--r", type=int, help="parity rows for a sampled demo code")
    p.add_argument("--w", type=float, help="release threshold override (demo)")
    p.add_argument("--code-file")
    p.add_argument("--syndrome", help="fixed syndrome bits; runs the fixed-syndrome experiment")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-tries", type=int, default=1000)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("simulate", parents=[common], help="adaptive test selection on null data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--selector", choices=("naive", "noisy-max"), default="naive")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--beta-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="also write per-trial (selected_index, p_value) rows here")
    p.set_defaults(func=cmd_simulate)
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
        rows = None
        if isinstance(result, tuple):
            result, rows = result
        if rows is not None and args.csv:
            _emit(render_report({}, "csv", rows, ("trial", "selected_index", "p_value")), args.csv)
        _emit(render_report(result, args.format), args.output)
        return 0
    except MaxInfoError as exc:
        error = {"error": {"code": exc.code, "message": str(exc), "exit_status": exc.exit_status}}
        sys.stdout.write(render_report(error, "json"))
        return exc.exit_status
    except OSError as exc:
        sys.stdout.write(render_report({"error": {"code": "io_error", "message": str(exc), "exit_status": 1}}))
        return 1
    except (ValueError, OverflowError) as exc:
        error = {"error": {"code": ParamOutOfRange.code, "message": str(exc), "exit_status": 2}}
        sys.stdout.write(render_report(error))
        return 2


if __name__ == "__main__":
    sys.exit(main())
