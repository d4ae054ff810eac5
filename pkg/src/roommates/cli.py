"""Command-line interface.

Exit status: 0 success (or a solved instance), 1 unsolvable instance,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import analysis, montecarlo
from .instance import (
    EagerOracle,
    InstanceFormatError,
    LazyPreferences,
    new_explicit_random,
    parse_instance,
)
from .solver import exhaustive_census, solve

EXIT_OK = 0
EXIT_UNSOLVABLE = 1
EXIT_USAGE = 2


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        value = int(float(text))  # allows 1e6
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _emit(rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        payload = rows[0] if len(rows) == 1 else rows
        json.dump(payload, out, indent=2)
        out.write("\n")
        return
    if not rows:
        return
    fields: list[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def cmd_solve(args: argparse.Namespace) -> int:
    if args.file is not None:
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        try:
            oracle = EagerOracle(parse_instance(text))
        except InstanceFormatError as exc:
            print(f"error: {args.file}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        try:
            if args.oracle == "lazy":
                oracle = LazyPreferences(args.random, args.seed)
            else:
                oracle = EagerOracle(new_explicit_random(args.random, args.seed))
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE

    events: list[dict] = []
    trace = None
    if args.trace:
        def trace(kind: str, **info) -> None:
            events.append({"event": kind, **info})

    outcome = solve(oracle, trace)
    counters = outcome.counters.as_dict()
    if args.json:
        record = {
            "n": oracle.n,
            "solved": outcome.solved,
            "pairs": outcome.matching.pairs() if outcome.solved else None,
            "failed_phase": None if outcome.solved else outcome.failed_phase.value,
            "counters": counters,
        }
        if args.trace:
            record["trace"] = events
        json.dump(record, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        for ev in events:
            if ev["event"] == "propose":
                print(
                    f"propose {ev['proposer']} -> {ev['to']} (rank {ev['rank']}),"
                    f" displaces {ev['displaced']}"
                )
            else:
                print("rotate " + " ".join(map(str, ev["cycle"])))
        if outcome.solved:
            print("pairs: " + " ".join(f"({x},{y})" for x, y in outcome.matching.pairs()))
        else:
            print(f"no stable matching (phase {outcome.failed_phase.value})")
        print("counters: " + " ".join(f"{k}={v}" for k, v in counters.items()))
    return EXIT_OK if outcome.solved else EXIT_UNSOLVABLE


def cmd_sample(args: argparse.Namespace) -> int:
    res = montecarlo.estimate(
        args.n, args.samples, args.seed, args.workers, eager=args.oracle == "eager"
    )
    _emit([res.as_dict()], args.format)
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    if args.budget is not None:
        grid = montecarlo.ScanGrid.with_budget(args.n0, args.k_max, args.budget)
    else:
        grid = montecarlo.ScanGrid.uniform(args.n0, args.k_max, args.samples)
    results = montecarlo.scan(grid, args.seed, args.workers)
    rows = []
    for r in results:
        if isinstance(r, montecarlo.ScanFailure):
            rows.append({"n": r.n, "M": r.M, "error": r.error})
        else:
            rows.append(r.as_dict())
    _emit(rows, args.format)
    failed = any(isinstance(r, montecarlo.ScanFailure) for r in results)
    return EXIT_USAGE if failed else EXIT_OK


def cmd_probe(args: argparse.Namespace) -> int:
    rows = [montecarlo.probe(n, args.samples, args.seed, args.workers).as_dict() for n in args.n]
    _emit(rows, args.format)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    if args.table1:
        points = analysis.table1()
    else:
        try:
            points = analysis.read_points_csv(Path(args.input).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    points = sorted(analysis.select(points, args.min_n, args.max_n), key=lambda pt: pt.n)
    if not points:
        print("error: no data points in the selected range", file=sys.stderr)
        return EXIT_USAGE
    window = args.window or len(points)
    try:
        fits = analysis.fit_power_law(points, window, args.model, skip_failed=args.window is not None)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit([f.as_row() for f in fits], args.format)
    return EXIT_OK


def cmd_exact4(args: argparse.Namespace) -> int:
    solvable, total = exhaustive_census(4)
    frac = Fraction(solvable, total)
    print(f"{solvable}/{total} = {frac.numerator}/{frac.denominator}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roommates", description="Stable roommates solver and p_n simulator."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a single instance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", help="instance file")
    src.add_argument("--random", type=int, metavar="N", help="random instance of size N")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--oracle", choices=("lazy", "eager"), default="lazy",
                   help="preference generation for --random (default: lazy)")
    p.add_argument("--trace", action="store_true", help="print proposals and rotations")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    def batch_args(q: argparse.ArgumentParser) -> None:
        q.add_argument("--seed", type=_seed, default=0)
        q.add_argument("--workers", type=_positive, default=1)
        q.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("sample", help="estimate p_n for one n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=_positive, required=True)
    p.add_argument("--oracle", choices=("lazy", "eager"), default="lazy")
    batch_args(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("scan", help="estimate p_n on the grid n0 * 2^k")
    p.add_argument("--n0", type=int, nargs="+", default=[8, 10, 12, 14])
    p.add_argument("--k-max", type=int, required=True)
    m = p.add_mutually_exclusive_group(required=True)
    m.add_argument("--samples", type=_positive, help="same M at every size")
    m.add_argument("--budget", type=float, help="M ~ budget / n^1.5")
    batch_args(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("probe", help="counter statistics of lazy solves")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--samples", type=_positive, required=True)
    batch_args(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("fit", help="power-law fits to (n, p, sigma) data")
    data = p.add_mutually_exclusive_group(required=True)
    data.add_argument("--input", help="CSV with columns n,p,sigma")
    data.add_argument("--table1", action="store_true", help="use the embedded published table")
    p.add_argument("--model", choices=analysis.MODELS, default="two-param")
    p.add_argument("--window", type=int, help="sliding window size (default: one fit to all points)")
    p.add_argument("--min-n", type=int, default=0)
    p.add_argument("--max-n", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("exact4", help="solve all 1296 instances of size 4")
    p.set_defaults(func=cmd_exact4)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, montecarlo.SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
