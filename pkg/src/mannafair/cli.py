"""Command-line interface.

Exit codes: 0 success / property true, 1 property false, 2 evaluation
budget exceeded, 3 input error.  All output is deterministic given the
inputs and seeds.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import algorithms, fixed_n, harness, oracles, welfare
from .core import BudgetExceededError, EfrCertificate, validate_certificate

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_BUDGET = 2
EXIT_INPUT = 3


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _cmd_gen(args) -> int:
    if args.family == "identical-chores":
        inst = harness.gen_identical_chores(args.n)
        meta = {"family": "identical-chores", "n": args.n}
    elif args.family == "paired-goods":
        inst = harness.gen_paired_goods(args.n)
        meta = {"family": "paired-goods", "n": args.n}
    elif args.family == "partition":
        if not args.set:
            raise ValueError("--set is required for the partition family")
        values = [int(x) for x in args.set.split(",") if x.strip()]
        inst, alloc, k = harness.gen_partition_reduction(values)
        meta = {"family": "partition", "set": values, "k": k}
        if args.alloc_out:
            _write(args.alloc_out, harness.serialize_allocation(alloc))
    elif args.family == "random":
        if args.n is None or args.m is None or args.seed is None:
            raise ValueError("--n, --m, and --seed are required for random")
        inst = harness.gen_random(
            args.n, args.m, args.values, Fraction(args.chore_prob), args.seed
        )
        meta = {
            "family": "random",
            "n": args.n,
            "m": args.m,
            "values": args.values,
            "chore_prob": args.chore_prob,
            "seed": args.seed,
        }
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown family {args.family}")
    _write(args.output, harness.serialize_instance(inst, meta))
    return EXIT_OK


def solve_instance(inst, algo: str, extend: bool = False, max_candidates=10**7):
    """Dispatch shared by the CLI and tests; returns the solve artifact."""
    if algo == "ef1":
        return algorithms.double_round_robin_ef1(inst)
    if algo == "efr":
        return algorithms.efr_n_minus_1(inst)
    if algo == "goods":
        if not extend:
            return algorithms.conflict_aware_picking(inst)
        partial, reserved, _ = algorithms.run_picking_rounds(inst)
        base = algorithms.extend_with_round_robin(inst, partial, reserved)
        witnesses = []
        for i in range(inst.num_agents):
            w = [set(b) for b in partial]
            w[i] |= set(reserved)
            witnesses.append(
                type(base)(tuple(frozenset(b) for b in w))
            )
        return EfrCertificate(base, reserved, tuple(witnesses))
    if algo == "fixed-n":
        _, cert, _ = fixed_n.search_efr_po(inst, max_candidates=max_candidates)
        return cert
    raise ValueError(f"unknown algorithm {algo}")


def _cmd_solve(args) -> int:
    inst = harness.parse_instance(_read(args.input))
    result = solve_instance(
        inst, args.algo, args.extend_round_robin, args.max_candidates
    )
    if args.algo == "ef1":
        _write(args.output, harness.serialize_allocation(result))
    else:
        _write(args.output, harness.serialize_certificate(result))
    return EXIT_OK


def _cmd_verify(args) -> int:
    inst = harness.parse_instance(_read(args.input))
    cert = harness.parse_certificate(_read(args.cert), inst)
    ok = validate_certificate(inst, cert)
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_FALSE


def _cmd_decide_efr(args) -> int:
    inst = harness.parse_instance(_read(args.input))
    alloc = harness.parse_allocation(_read(args.alloc), inst)
    decision = oracles.decide_efr_k(inst, alloc, args.k, budget=args.budget)
    print("true" if decision.verdict else "false")
    return EXIT_OK if decision.verdict else EXIT_FALSE


def _cmd_check_po(args) -> int:
    inst = harness.parse_instance(_read(args.input))
    alloc = harness.parse_allocation(_read(args.alloc), inst)
    ok = oracles.is_pareto_optimal_bruteforce(inst, alloc, budget=args.budget)
    print("pareto-optimal" if ok else "dominated")
    return EXIT_OK if ok else EXIT_FALSE


def _cmd_perturb(args) -> int:
    inst = harness.parse_instance(_read(args.input))
    pert = welfare.perturb_nondegenerate(inst)
    _write(args.output, harness.serialize_perturbed(pert))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mannafair",
        description="Fair division of indivisible mixed manna with "
        "exact-rational certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance file")
    gen.add_argument(
        "--family",
        required=True,
        choices=["identical-chores", "paired-goods", "partition", "random"],
    )
    gen.add_argument("--n", type=int)
    gen.add_argument("--m", type=int)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--values", type=int, default=9)
    gen.add_argument("--chore-prob", default="1/2")
    gen.add_argument("--set", help="comma-separated integers, e.g. '1,1,2'")
    gen.add_argument("--alloc-out", help="also write the reduction allocation")
    gen.add_argument("-o", "--output", required=True)
    gen.set_defaults(func=_cmd_gen)

    solve = sub.add_parser("solve", help="run an allocation algorithm")
    solve.add_argument(
        "--algo", required=True, choices=["ef1", "efr", "goods", "fixed-n"]
    )
    solve.add_argument("--extend-round-robin", action="store_true")
    solve.add_argument("--max-candidates", type=int, default=10**7)
    solve.add_argument("-i", "--input", required=True)
    solve.add_argument("-o", "--output", required=True)
    solve.set_defaults(func=_cmd_solve)

    verify = sub.add_parser("verify", help="validate an EFR certificate")
    verify.add_argument("--cert", required=True)
    verify.add_argument("-i", "--input", required=True)
    verify.set_defaults(func=_cmd_verify)

    decide = sub.add_parser("decide-efr", help="exhaustive EFR-k decision")
    decide.add_argument("-i", "--input", required=True)
    decide.add_argument("--alloc", required=True)
    decide.add_argument("--k", type=int, required=True)
    decide.add_argument("--budget", type=int, default=oracles.DEFAULT_BUDGET)
    decide.set_defaults(func=_cmd_decide_efr)

    po = sub.add_parser("check-po", help="brute-force Pareto optimality")
    po.add_argument("-i", "--input", required=True)
    po.add_argument("--alloc", required=True)
    po.add_argument("--budget", type=int, default=oracles.DEFAULT_BUDGET)
    po.set_defaults(func=_cmd_check_po)

    perturb = sub.add_parser(
        "perturb", help="emit a non-degenerate perturbed instance"
    )
    perturb.add_argument("-i", "--input", required=True)
    perturb.add_argument("-o", "--output", required=True)
    perturb.set_defaults(func=_cmd_perturb)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 means budget here
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (harness.ParseError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
