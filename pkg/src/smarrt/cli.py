"""Command-line interface: run a trial, run a campaign, validate inputs,
summarize results.

Exit codes: 0 success, 1 planning/trial failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    ScenarioError,
    load_campaign,
    load_scenario,
    read_results_csv,
    run_campaign,
    run_trial,
    summarize_rows,
)

EXIT_OK = 0
EXIT_TRIAL_FAILED = 1
EXIT_INVALID_INPUT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smarrt",
        description=(
            "2D reactive motion replanning benchmark: a self-repairing anytime "
            "RRT planner, four baseline replanners, and a dynamic-obstacle "
            "Monte-Carlo harness."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single trial on a scenario file")
    run.add_argument("--scenario", required=True, help="scenario JSON file")
    run.add_argument("--planner", required=True, help="planner name (e.g. smarrt, errt)")
    run.add_argument("--seed", type=int, required=True, help="trial seed")
    run.add_argument("--trace", help="write per-tick JSONL trace to this file")
    run.add_argument(
        "--trace-utilities",
        action="store_true",
        help="include utility-map grids in replan trace records",
    )

    camp = sub.add_parser("campaign", help="run a Monte-Carlo campaign")
    camp.add_argument("--config", required=True, help="campaign JSON file")
    camp.add_argument("--out", required=True, help="output results CSV (resumable)")
    camp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    camp.add_argument("--quiet", action="store_true", help="suppress progress output")

    val = sub.add_parser("validate", help="schema-check a scenario file")
    val.add_argument("--scenario", required=True, help="scenario JSON file")

    summ = sub.add_parser("summarize", help="print per-group medians for a results CSV")
    summ.add_argument("--csv", required=True, help="results CSV file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "campaign":
            return _cmd_campaign(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "summarize":
            return _cmd_summarize(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    spec = load_scenario(args.scenario)
    trace_file = open(args.trace, "w") if args.trace else None
    try:
        result = run_trial(
            spec,
            args.planner,
            args.seed,
            trace=trace_file,
            trace_utilities=args.trace_utilities,
        )
    finally:
        if trace_file is not None:
            trace_file.close()
    print(
        f"scenario={result.scenario_id} planner={result.planner} seed={result.seed} "
        f"success={'yes' if result.success else 'no'} travel_time_s={result.travel_time:.3f} "
        f"n_replans={result.n_replans} avg_replan_time_s={result.avg_replan_time:.6f}"
    )
    return EXIT_OK if result.success else EXIT_TRIAL_FAILED


def _cmd_campaign(args: argparse.Namespace) -> int:
    cc = load_campaign(args.config)

    def progress(done: int, total: int) -> None:
        if done == total or done % 25 == 0:
            print(f"  {done}/{total} trials", file=sys.stderr)

    run_campaign(cc, args.out, jobs=args.jobs, progress=None if args.quiet else progress)
    rows = read_results_csv(args.out)
    for line in summarize_rows(rows):
        print(line)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.scenario)
    if not path.exists():
        print(f"error: {path}: no such file", file=sys.stderr)
        return EXIT_INVALID_INPUT
    spec = load_scenario(path)
    print(
        f"{path}: valid scenario '{spec.scenario_id}' "
        f"({spec.n_obstacles} obstacles, {len(spec.statics)} statics)"
    )
    return EXIT_OK


def _cmd_summarize(args: argparse.Namespace) -> int:
    rows = read_results_csv(args.csv)
    for line in summarize_rows(rows):
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
