"""Command-line surface: bounds, rates, simulation, sweeps, curves, verify.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 domain error
(e.g. a non-corner cache size for the simulator), 4 simulation failure
(decode error or measured rate above the formula). Memory values are only
accepted as exact "p/q" or integer strings. The default seed is 0 and can be
overridden by the CACHELAB_SEED environment variable; an explicit --seed
flag wins over both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import analysis, bounds, schemes, verify
from .core import (
    CacheLabError,
    DeliveryMode,
    DivisibilityError,
    DomainError,
    NotCornerError,
    OutOfRangeError,
    format_rational,
    make_config,
    parse_rational,
    random_demands,
    worst_case_demands,
)

EXIT_OK = 0
EXIT_VERIFY_FAILURE = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_SIMULATION = 4


def _default_seed() -> int:
    try:
        return int(os.environ.get("CACHELAB_SEED", "0"))
    except ValueError:
        return 0


def _mode(value: str) -> DeliveryMode:
    try:
        return DeliveryMode(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mode must be 'cen' or 'd2d', got {value!r}")


def _rational(value: str) -> Fraction:
    try:
        return parse_rational(value)
    except OutOfRangeError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int_range(value: str) -> range:
    """Parse 'a:b' (inclusive) or a single integer into a range."""
    if ":" in value:
        lo, hi = value.split(":", 1)
        return range(int(lo), int(hi) + 1)
    v = int(value)
    return range(v, v + 1)


def _l_set(value: str) -> tuple:
    return tuple(item.strip() for item in value.split(",") if item.strip())


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cachelab",
        description="Exact storage-rate tradeoff bounds and bit-exact scheme "
        "simulation for cache-aided networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p, with_m=True):
        p.add_argument("--mode", type=_mode, required=True, help="cen or d2d")
        p.add_argument("--N", type=int, required=True, help="number of files")
        p.add_argument("--K", type=int, required=True, help="number of users")
        p.add_argument("--L", type=int, required=True, help="demands per user")
        if with_m:
            p.add_argument(
                "--M", type=_rational, required=True, help="cache size, 'p/q' or integer"
            )

    p_bound = sub.add_parser("bound", help="lower bound with argmax (s, ell)")
    add_config_flags(p_bound)
    p_bound.add_argument("--cutset", action="store_true", help="cut-set baseline instead")
    p_bound.add_argument("--terms", action="store_true", help="dump the full (s, ell) table")
    p_bound.add_argument("--format", choices=("human", "json", "csv"), default="human")
    p_bound.add_argument("--out", default=None)

    p_rate = sub.add_parser("rate", help="achievable delivery rate")
    add_config_flags(p_rate)
    p_rate.add_argument(
        "--eval",
        choices=("formula", "envelope"),
        default="envelope",
        help="closed form at M, or the memory-sharing corner envelope",
    )
    p_rate.add_argument("--format", choices=("human", "json"), default="human")
    p_rate.add_argument("--out", default=None)

    p_sim = sub.add_parser("simulate", help="bit-exact place/deliver/decode run")
    p_sim.add_argument("--mode", type=_mode, required=True)
    p_sim.add_argument("--N", type=int, required=True)
    p_sim.add_argument("--K", type=int, required=True)
    p_sim.add_argument("--L", type=int, required=True)
    p_sim.add_argument("--t", type=int, required=True, help="placement parameter")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--demands", choices=("worst", "random"), default="worst")
    p_sim.add_argument("--file-bits", type=int, default=None)
    p_sim.add_argument("--trace", default=None, help="write the transmission log as JSON")
    p_sim.add_argument("--format", choices=("human", "json"), default="human")

    p_sweep = sub.add_parser("sweep", help="gap records over a parameter grid")
    p_sweep.add_argument("--mode", type=_mode, required=True)
    p_sweep.add_argument("--N", type=_int_range, required=True, help="'a:b' or single N")
    p_sweep.add_argument("--K", type=_int_range, required=True, help="'a:b' or single K")
    p_sweep.add_argument(
        "--L", type=_l_set, default=("1", "2", "3", "N"), help="comma list; 'N' allowed"
    )
    p_sweep.add_argument("--density", type=int, default=20, help="M refinements per N")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--out", default=None)

    p_curve = sub.add_parser("curve", help="plot-ready tradeoff columns as CSV")
    add_config_flags(p_curve, with_m=False)
    p_curve.add_argument("--points", type=int, default=21)
    p_curve.add_argument("--format", choices=("csv",), default="csv")
    p_curve.add_argument("--out", default=None)

    p_case = sub.add_parser("case-study", help="verify the worked small instances")
    p_case.add_argument(
        "--preset",
        choices=analysis.CASE_STUDY_PRESETS + ("all",),
        default="all",
    )
    p_case.add_argument("--format", choices=("human", "json"), default="human")

    p_verify = sub.add_parser("verify", help="run the built-in verification suite")
    group = p_verify.add_mutually_exclusive_group()
    group.add_argument("--quick", action="store_true", help="case studies + small grids")
    group.add_argument("--full", action="store_true", help="complete grids (minutes)")

    return parser


def _cmd_bound(args) -> int:
    config = make_config(args.N, args.K, args.L, args.M, args.mode)
    if config.mode is DeliveryMode.CENTRALIZED:
        result = (
            bounds.lb_cutset_centralized(config)
            if args.cutset
            else bounds.lb_centralized(config)
        )
    else:
        result = bounds.lb_cutset_d2d(config) if args.cutset else bounds.lb_d2d(config)
    if args.format == "json":
        _emit(json.dumps(result.to_json_dict(), indent=2) + "\n", args.out)
    elif args.format == "csv" or args.terms:
        text = result.terms_csv()
        if args.format != "csv":
            text = (
                f"value={format_rational(result.value)} s={result.best_s} "
                f"ell={result.best_ell} mu={result.mu_at_best}\n" + text
            )
        _emit(text, args.out)
    else:
        _emit(
            f"value={format_rational(result.value)} s={result.best_s} "
            f"ell={result.best_ell} mu={result.mu_at_best}\n",
            args.out,
        )
    return EXIT_OK


def _cmd_rate(args) -> int:
    config = make_config(args.N, args.K, args.L, args.M, args.mode)
    eval_mode = (
        bounds.EvalMode.FORMULA_AT_M
        if args.eval == "formula"
        else bounds.EvalMode.CORNER_ENVELOPE
    )
    if config.mode is DeliveryMode.CENTRALIZED:
        value = bounds.rate_ach_centralized(config, eval_mode)
    else:
        value = bounds.rate_ach_d2d(config, eval_mode)
    if args.format == "json":
        _emit(
            json.dumps({"rate": format_rational(value), "eval": args.eval}) + "\n",
            args.out,
        )
    else:
        _emit(f"rate={format_rational(value)}\n", args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    m = Fraction(args.N * args.t, args.K)
    config = make_config(args.N, args.K, args.L, m, args.mode, file_bits=args.file_bits)
    demands = (
        worst_case_demands(config)
        if args.demands == "worst"
        else random_demands(config, seed)
    )
    report = schemes.simulate(config, args.t, demands, seed)
    if args.trace:
        from .core import Library

        b = args.file_bits or schemes.default_file_bits(args.K, args.t)
        library = Library.generate(args.N, b, seed)
        if config.mode is DeliveryMode.CENTRALIZED:
            caches = schemes.place_centralized(config, args.t, library)
            log = schemes.deliver_centralized(config, args.t, caches, demands, library)
        else:
            caches = schemes.place_d2d(config, args.t, library)
            log = schemes.deliver_d2d(config, args.t, caches, demands)
        with open(args.trace, "w") as fh:
            json.dump(log.to_json_dict(), fh, indent=2)
            fh.write("\n")
    if args.format == "json":
        sys.stdout.write(json.dumps(report.to_json_dict(), indent=2) + "\n")
    else:
        ok = "all-ok" if all(report.decode_ok) else "FAILED"
        sys.stdout.write(
            f"rate={format_rational(report.measured_rate)} "
            f"formula={format_rational(report.formula_rate)} "
            f"strategy={report.strategy} decode={ok}\n"
        )
    if not all(report.decode_ok) or report.measured_rate > report.formula_rate:
        return EXIT_SIMULATION
    return EXIT_OK


def _cmd_sweep(args) -> int:
    result = analysis.sweep(args.N, args.K, args.L, args.mode, args.density, args.jobs)
    if args.format == "json":
        payload = {
            "summary": result.summary,
            "records": [r.to_json_dict() for r in result.records],
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
        return EXIT_OK
    lines = ["N,K,L,mode,M,lb_new,lb_cutset,rate_envelope,rate_formula,gap,regime"]
    for r in result.records:
        gap = format_rational(r.gap) if r.gap is not None else "degenerate"
        lines.append(
            f"{r.n_files},{r.n_users},{r.demands_per_user},{r.mode.value},"
            f"{format_rational(r.memory)},{format_rational(r.lower_bound)},"
            f"{format_rational(r.cutset)},{format_rational(r.ach_envelope)},"
            f"{format_rational(r.ach_formula)},{gap},{r.regime}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_curve(args) -> int:
    rows = analysis.curve(args.N, args.K, args.L, args.mode, args.points)
    _emit(analysis.curve_csv(rows), args.out)
    return EXIT_OK


def _cmd_case_study(args) -> int:
    presets = (
        analysis.CASE_STUDY_PRESETS if args.preset == "all" else (args.preset,)
    )
    all_ok = True
    results = []
    for preset in presets:
        for check in analysis.case_study(preset):
            all_ok &= check.ok
            results.append((preset, check))
    if args.format == "json":
        sys.stdout.write(
            json.dumps(
                [
                    {"preset": p, "identity": c.name, "ok": c.ok, "detail": c.detail}
                    for p, c in results
                ],
                indent=2,
            )
            + "\n"
        )
    else:
        for preset, check in results:
            status = "PASS" if check.ok else f"FAIL ({check.detail})"
            sys.stdout.write(f"case_study:{preset}:{check.name} {status}\n")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILURE


def _cmd_verify(args) -> int:
    profile = "full" if args.full else "quick"
    results = verify.run_profile(profile)
    ok = True
    for result in results:
        ok &= result.ok
        sys.stdout.write(result.line() + "\n")
    sys.stdout.write(
        f"{'ALL CHECKS PASSED' if ok else 'CHECKS FAILED'} "
        f"({sum(r.ok for r in results)}/{len(results)})\n"
    )
    return EXIT_OK if ok else EXIT_VERIFY_FAILURE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "bound": _cmd_bound,
        "rate": _cmd_rate,
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "curve": _cmd_curve,
        "case-study": _cmd_case_study,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (NotCornerError, DivisibilityError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except CacheLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
