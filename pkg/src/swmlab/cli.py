"""Command-line front end.

Subcommands: simulate | lp | classify | verify | conjecture.  Reports are
JSON with sorted keys, so identical inputs and seeds produce byte-identical
files; timing goes to stderr only.  Exit codes: 0 success, 1 verification
failure, 2 usage or size error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import SwmlabError
from .gain import GainContext, conjecture_check, expected_trace, verify_eq1, \
    verify_lemmas, verify_second_half
from .instances import load_instance, random_instance
from .lp import (LAMBDA_THRESHOLD, build_lp_beta, build_lp_beta_lambda,
                 build_lp_general, closed_form_beta_lambda,
                 closed_form_general, simplex_solve)
from .oracles import classify_second_order

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _parse_rational(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def _write_report(report: dict, out_path) -> None:
    payload = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(payload)
    else:
        sys.stdout.write(payload)


def _report(command: str, parameters: dict, results: dict) -> dict:
    return {"command": command, "parameters": parameters,
            "results": results, "version": __version__}


def cmd_simulate(args) -> int:
    instance = load_instance(args.instance)
    ctx = GainContext(instance)
    trace = expected_trace(ctx, mode=args.mode, samples=args.samples,
                           seed=args.seed, threads=args.threads)
    results = trace.to_dict()
    results["lower_bound_half_plus_beta"] = 0.5 + trace.beta / 2
    report = _report("simulate", {
        "instance": str(args.instance), "mode": args.mode,
        "samples": args.samples if args.mode != "exact" else None,
        "seed": args.seed if args.mode != "exact" else None,
    }, results)
    _write_report(report, args.out)
    if args.csv or args.out:
        csv_path = args.csv or str(Path(args.out).with_suffix(".csv"))
        Path(csv_path).write_text(trace.to_csv())
    print(f"ratio = {trace.ratio!r}", file=sys.stderr)
    print(f"beta = {trace.beta!r}", file=sys.stderr)
    print(f"bound 1/2 + beta/2 = {0.5 + trace.beta / 2!r}", file=sys.stderr)
    return EXIT_OK


def cmd_lp(args) -> int:
    beta = _parse_rational(args.beta)
    closed = None
    if args.family == "beta":
        model = build_lp_beta(args.n, beta)
    elif args.family == "beta-lambda":
        if args.lam is None:
            raise ValueError("--lambda is required for family beta-lambda")
        lam = _parse_rational(args.lam)
        model = build_lp_beta_lambda(args.n, lam, beta)
        if float(lam) > LAMBDA_THRESHOLD:
            closed = closed_form_beta_lambda(args.n, lam, beta)
    else:
        model = build_lp_general(args.n)
        closed = closed_form_general(args.n) if args.n >= 8 else None
    if args.export_lp:
        Path(args.export_lp).write_text(model.to_text())
    solution = simplex_solve(model)
    results = {"model": {k: (str(v) if isinstance(v, Fraction) else v)
                         for k, v in model.metadata.items()},
               "num_vars": model.num_vars, "num_rows": model.num_rows,
               "solution": solution.to_dict()}
    print(f"simplex optimum = {solution.objective!r}", file=sys.stderr)
    if closed is not None:
        closed_val = closed if isinstance(closed, float) else closed.exact
        results["closed_form"] = closed_val
        results["difference"] = solution.objective - closed_val
        if not isinstance(closed, float):
            results["asymptotic"] = closed.asymptotic
        print(f"closed form = {closed_val!r}", file=sys.stderr)
        print(f"difference = {solution.objective - closed_val!r}",
              file=sys.stderr)
    report = _report("lp", {"family": args.family, "n": args.n,
                            "lambda": args.lam, "beta": args.beta}, results)
    _write_report(report, args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    instance = load_instance(args.instance)
    agents = []
    for idx, oracle in enumerate(instance.oracles):
        cls = classify_second_order(oracle)
        agents.append({"agent": idx, "kind": oracle.kind,
                       "classification": cls.to_dict()})
        print(f"agent {idx} ({oracle.kind}): {cls.label}", file=sys.stderr)
    report = _report("classify", {"instance": str(args.instance)},
                     {"agents": agents})
    _write_report(report, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = load_instance(args.instance)
    ctx = GainContext(instance)
    wanted = [c.strip() for c in args.checks.split(",") if c.strip()]
    known = {"lemmas", "eq1", "secondhalf"}
    unknown = set(wanted) - known
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}; "
                         f"choose from {sorted(known)}")
    results = {}
    all_passed = True
    for check in wanted:
        if check == "lemmas":
            rep = verify_lemmas(ctx)
        elif check == "eq1":
            rep = verify_eq1(ctx)
        else:
            rep = verify_second_half(ctx)
        results[check] = rep.to_dict()
        all_passed = all_passed and rep.passed
        print(f"{check}: {'PASS' if rep.passed else 'FAIL'}", file=sys.stderr)
    report = _report("verify", {"instance": str(args.instance),
                                "checks": wanted},
                     {"checks": results, "passed": all_passed})
    _write_report(report, args.out)
    return EXIT_OK if all_passed else EXIT_VERIFY_FAILED


def cmd_conjecture(args) -> int:
    reports = []
    if args.instance:
        instances = [(str(args.instance), load_instance(args.instance))]
    elif args.random:
        instances = []
        for k in range(args.random):
            n = 2 + (k % max(1, args.nmax - 1))
            m = 2 + (k % max(1, args.mmax - 1))
            inst = random_instance(min(n, args.nmax), min(m, args.mmax),
                                   seed=args.seed + k)
            instances.append((inst.name, inst))
    else:
        raise ValueError("provide an instance path or --random COUNT")
    min_gap = None
    counterexample = None
    for name, inst in instances:
        rep = conjecture_check(inst, mode=args.mode, samples=args.samples,
                               seed=args.seed)
        entry = {"instance": name, **rep.to_dict()}
        reports.append(entry)
        if min_gap is None or rep.gap < min_gap:
            min_gap = rep.gap
        if rep.counterexample and counterexample is None:
            counterexample = entry
    results = {"instances": reports, "min_gap": min_gap,
               "counterexample": counterexample}
    print(f"min gap = {min_gap!r}", file=sys.stderr)
    if counterexample:
        print(f"counterexample on {counterexample['instance']}",
              file=sys.stderr)
    report = _report("conjecture", {
        "instance": str(args.instance) if args.instance else None,
        "random": args.random, "nmax": args.nmax, "mmax": args.mmax,
        "seed": args.seed, "mode": args.mode,
    }, results)
    _write_report(report, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swmlab",
        description="Online submodular welfare maximization workbench")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="expected greedy trace of an instance")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.add_argument("--csv", help="CSV trace path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lp", help="build and solve a factor-revealing LP")
    p.add_argument("--family", choices=["beta", "beta-lambda", "general"],
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam",
                   help="lambda as decimal or fraction, e.g. 13/16")
    p.add_argument("--beta", default="0")
    p.add_argument("--out")
    p.add_argument("--export-lp", help="write the plain-text LP listing here")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("classify",
                       help="second-order classification per agent")
    p.add_argument("instance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="run the trace verification suites")
    p.add_argument("instance")
    p.add_argument("--checks", default="lemmas",
                   help="comma-separated: lemmas,eq1,secondhalf")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("conjecture",
                       help="move/copy reordering conjecture scan")
    p.add_argument("instance", nargs="?")
    p.add_argument("--random", type=int,
                   help="scan this many seeded random instances")
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--mmax", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_conjecture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.monotonic()
    try:
        code = args.func(args)
    except SwmlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"elapsed: {time.monotonic() - start:.3f}s", file=sys.stderr)
    return code


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
