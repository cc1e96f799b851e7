"""Analysis CLI: median tables, campaign figures, trace heatmaps.

Pure file-in/file-out; the only coupling to the benchmark is the results
CSV and trace JSONL formats.
"""

from __future__ import annotations

import argparse
import sys

from .heatmap import plot_trace_heatmaps
from .plots import plot_campaign
from .tables import AnalysisError, median_table


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smarrt-analysis",
        description="Offline analysis of replanning benchmark CSVs and traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    table = sub.add_parser("table", help="print the median replanning-time table")
    table.add_argument("--csv", required=True, help="results CSV")
    table.add_argument("--out", help="also write the table as CSV here")

    plot = sub.add_parser("plot", help="write campaign figures (one per obstacle count)")
    plot.add_argument("--csv", required=True, help="results CSV")
    plot.add_argument("--out-dir", required=True, help="directory for PNG output")

    heat = sub.add_parser("heatmap", help="render utility-map heatmaps from a trace")
    heat.add_argument("--trace", required=True, help="trace JSONL (with utility grids)")
    heat.add_argument("--out-dir", required=True, help="directory for PNG output")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "table":
            result = median_table(args.csv)
            print(result.to_text())
            if args.out:
                result.write_csv(args.out)
        elif args.command == "plot":
            for path in plot_campaign(args.csv, args.out_dir):
                print(f"wrote {path}")
        elif args.command == "heatmap":
            for path in plot_trace_heatmaps(args.trace, args.out_dir):
                print(f"wrote {path}")
    except AnalysisError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
