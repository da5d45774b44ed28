"""Command-line surface: every subsystem as a subcommand with CSV/JSON output.

Exit codes: 0 success, 2 input validation failure, 3 internal invariant
violation (a bug signal, distinct from misuse so CI can tell them apart).
Identical arguments and seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from math import gcd
from multiprocessing import Pool
from typing import Sequence

from sqflab.arith_core import (
    NotCoprimeError,
    NotSquarefreeError,
    factor_modulus,
    squarefree_flags,
)
from sqflab.congruence_count import BoxQuery, check_symmetry, evaluate_bounds
from sqflab.decomposition_pipeline import decompose_error, pipeline_report
from sqflab.exponent_calculus import (
    MENUS,
    compute_theta,
    corollary_exponent,
    parse_term_menu,
    verify_choices,
)
from sqflab.progression_stats import (
    error_term,
    least_squarefree,
    reference_ratio,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3

CSV_HEADER = "X,q,a,count_ap,count_coprime,E_num,E_den,ratio_hooley,n_q_a,ratio_corollary"


def _fmt_float(v: float) -> str:
    return f"{v:.12g}"


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# error-term


def _cmd_error_term(args: argparse.Namespace) -> int:
    modulus = factor_modulus(args.q)
    result = error_term(args.x, modulus, args.a)
    payload = {
        "x": args.x,
        "q": modulus.q,
        "a": result.residue,
        "phi": modulus.phi,
        "count_ap": result.progression_count,
        "count_coprime": result.coprime_count,
        "error": str(result.error),
        "reference_ratio": reference_ratio(args.x, modulus, args.a),
    }
    if args.decompose:
        decomposed = decompose_error(args.x, modulus, args.a)
        payload["error_decomposed"] = str(decomposed)
        payload["identity_ok"] = decomposed == result.error
        if not payload["identity_ok"]:
            _emit(json.dumps(payload, indent=2) + "\n", args.output)
            print("internal error: decomposition identity violated", file=sys.stderr)
            return EXIT_INVARIANT
    _emit(json.dumps(payload, indent=2) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan


def _residues_for(q: int, policy: str, seed: int) -> list[int]:
    if q == 1:
        return [0]
    if policy == "all":
        return [a for a in range(1, q) if gcd(a, q) == 1]
    if policy.startswith("sample:"):
        k = int(policy.split(":", 1)[1])
        rng = random.Random(f"{seed}:{q}")
        units = [a for a in range(1, q) if gcd(a, q) == 1]
        if len(units) <= k:
            return units
        return sorted(rng.sample(units, k))
    a = int(policy) % q
    if gcd(a, q) != 1:
        raise NotCoprimeError(f"residue {a} is not coprime to {q}")
    return [a]


def _scan_rows_for_q(task: tuple[int, tuple[int, ...], str, int]) -> list[tuple]:
    q, x_values, policy, seed = task
    modulus = factor_modulus(q)
    rows = []
    for x in x_values:
        if q > x:
            continue
        for a in _residues_for(q, policy, seed):
            res = error_term(x, modulus, a)
            ratio = reference_ratio(x, modulus, a)
            n_qa = least_squarefree(modulus, a)
            corollary = n_qa / float(q) ** (36 / 25)
            rows.append(
                (
                    x,
                    q,
                    a,
                    res.progression_count,
                    res.coprime_count,
                    res.error.numerator,
                    res.error.denominator,
                    ratio,
                    n_qa,
                    corollary,
                )
            )
    return rows


def _cmd_scan(args: argparse.Namespace) -> int:
    if args.q_min < 1 or args.q_max < args.q_min:
        raise ValueError(f"bad q range [{args.q_min}, {args.q_max}]")
    if any(x < 1 for x in args.x):
        raise ValueError("x values must be >= 1")
    x_values = tuple(sorted(set(args.x)))
    flags = squarefree_flags(1, args.q_max)
    q_list = [q for q in range(args.q_min, args.q_max + 1) if flags[q - 1]]
    tasks = [(q, x_values, args.a, args.seed) for q in q_list]
    if args.workers > 1 and len(tasks) > 1:
        with Pool(processes=args.workers) as pool:
            per_q = pool.map(_scan_rows_for_q, tasks)
    else:
        per_q = [_scan_rows_for_q(t) for t in tasks]
    # Rows ordered by (X, q, a) regardless of worker layout.
    rows = sorted(row for chunk in per_q for row in chunk)

    lines = [CSV_HEADER]
    for row in rows[args.start_row :]:
        x, q, a, cap, ccop, enum, eden, ratio, n_qa, cor = row
        lines.append(
            f"{x},{q},{a},{cap},{ccop},{enum},{eden},"
            f"{_fmt_float(ratio)},{n_qa},{_fmt_float(cor)}"
        )
    text = "\n".join(lines) + "\n"
    if args.format == "json":
        keys = CSV_HEADER.split(",")
        payload = [dict(zip(keys, line.split(","))) for line in lines[1:]]
        text = json.dumps(payload, indent=2) + "\n"
    _emit(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# count-box


def _cmd_count_box(args: argparse.Namespace) -> int:
    modulus = factor_modulus(args.q)
    query = BoxQuery(
        u=args.u,
        v=args.v,
        m_bound=args.m,
        n_bound=args.n,
        modulus=modulus,
        residue=args.a,
        dyadic=args.dyadic,
    )
    report = evaluate_bounds(query, args.alpha)
    payload = {
        "u": args.u,
        "v": args.v,
        "m": args.m,
        "n": args.n,
        "q": args.q,
        "a": args.a,
        "dyadic": args.dyadic,
        "count": report.count,
        "alpha": str(report.alpha),
        "bounds": {
            "trivial": report.trivial,
            "weil": report.weil,
            "pierce_mn": report.pierce_mn,
            "pierce_nm": report.pierce_nm,
            "interpolated": report.interpolated,
        },
        "ratios": report.ratios(),
    }
    if args.v < 0:
        sym = check_symmetry(query)
        payload["symmetry"] = {
            "mirrored_count": sym.mirrored_count,
            "equal": sym.equal,
        }
        if not sym.equal:
            _emit(json.dumps(payload, indent=2) + "\n", args.output)
            print("internal error: symmetry relation violated", file=sys.stderr)
            return EXIT_INVARIANT
    _emit(json.dumps(payload, indent=2) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# pipeline


def _cmd_pipeline(args: argparse.Namespace) -> int:
    modulus = factor_modulus(args.q)
    report = pipeline_report(
        args.x, modulus, args.a, m0=args.m0, n0=args.n0, alpha=args.alpha
    )
    _emit(json.dumps(report.as_dict(), indent=2) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# optimize


def _cmd_optimize(args: argparse.Namespace) -> int:
    if args.menu_file is not None:
        with open(args.menu_file, encoding="utf-8") as fh:
            terms = parse_term_menu(fh.read())
        menu_name = args.menu_file
    else:
        terms = list(MENUS[args.menu])
        menu_name = args.menu
    result = compute_theta(terms, rho_min=args.rho_min)
    payload: dict = {
        "menu": menu_name,
        "terms": [
            {"label": t.label, "coeff_x": str(t.coeff_x), "coeff_rho": str(t.coeff_rho)}
            for t in terms
        ],
        "feasible": result.feasible,
    }
    if result.feasible:
        assert result.theta is not None
        choice = verify_choices(result.theta) if result.theta < 1 else None
        payload.update(
            {
                "theta": str(result.theta),
                "binding_constraint": result.binding_constraint,
                "slack_at_theta": {k: str(v) for k, v in result.slack_at_theta.items()},
                "corollary_exponent": str(corollary_exponent(result.theta))
                if 0 < result.theta < 1
                else None,
                "anchor_checks": {
                    "rho": str(choice.rho),
                    "m0_exponent": str(choice.m0_exponent),
                    "n0_exponent": str(choice.n0_exponent),
                    "m0_floored": choice.m0_floored,
                    "all_passed": choice.all_passed,
                    "checks": [
                        {"label": c.label, "passed": c.passed, "detail": c.detail}
                        for c in choice.checks
                    ],
                }
                if choice is not None
                else None,
            }
        )
    else:
        payload["theta"] = None
        payload["binding_constraint"] = result.binding_constraint
    _emit(json.dumps(payload, indent=2) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", default=None, help="write to file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqflab",
        description="Exact experiments on squarefree numbers in arithmetic progressions.",
    )
    default_workers = int(os.environ.get("SQFLAB_WORKERS", "1"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("error-term", help="exact progression error term at one (x, q, a)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--decompose", action="store_true", help="also run the identity check")
    _add_common_output(p)
    p.set_defaults(func=_cmd_error_term)

    p = sub.add_parser("scan", help="CSV table of error terms over a modulus range")
    p.add_argument("--x", type=int, nargs="+", required=True, help="one or more cutoffs")
    p.add_argument("--q-min", type=int, default=1)
    p.add_argument("--q-max", type=int, required=True)
    p.add_argument(
        "--a",
        default="1",
        help="residue policy: an integer, 'all', or 'sample:K'",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-row", type=int, default=0, help="resume: skip leading rows")
    p.add_argument("--workers", type=int, default=default_workers)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_common_output(p)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("count-box", help="exact congruence-box count with bound envelopes")
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--dyadic", action="store_true")
    p.add_argument("--alpha", type=_parse_fraction, default=Fraction(2, 15))
    _add_common_output(p)
    p.set_defaults(func=_cmd_count_box)

    p = sub.add_parser("pipeline", help="full decomposition report at one (x, q, a)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--m0", type=float, default=None)
    p.add_argument("--n0", type=float, default=None)
    p.add_argument("--alpha", type=_parse_fraction, default=Fraction(2, 15))
    _add_common_output(p)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("optimize", help="distribution exponent from a term menu")
    p.add_argument("--menu", choices=sorted(MENUS), default="default")
    p.add_argument("--menu-file", default=None, help="custom menu file (label cx crho)")
    p.add_argument("--rho-min", type=_parse_fraction, default=Fraction(1, 2))
    _add_common_output(p)
    p.set_defaults(func=_cmd_optimize)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NotSquarefreeError, NotCoprimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RuntimeError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
