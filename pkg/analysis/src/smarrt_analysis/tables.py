"""Results loading and the median replanning-time table."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

__all__ = ["AnalysisError", "EXPECTED_COLUMNS", "PLANNER_ORDER", "load_results", "median_table", "MedianTable"]

EXPECTED_COLUMNS = [
    "scenario_id",
    "planner",
    "seed",
    "n_obstacles",
    "obstacle_speed",
    "success",
    "travel_time_s",
    "n_replans",
    "avg_replan_time_s",
    "total_replan_time_s",
]

PLANNER_ORDER = ["smarrt", "errt", "drrt", "mprrt", "ebgrrt"]

PLANNER_LABELS = {
    "smarrt": "SMARRT",
    "errt": "ERRT",
    "drrt": "DRRT",
    "mprrt": "MP-RRT",
    "ebgrrt": "EBG-RRT",
}


class AnalysisError(ValueError):
    """Invalid or unusable analysis input."""


def load_results(csv_path: str | Path) -> pd.DataFrame:
    """Load a results CSV, enforcing the exact column schema."""
    path = Path(csv_path)
    if not path.exists():
        raise AnalysisError(f"{path}: no such file")
    df = pd.read_csv(path)
    if list(df.columns) != EXPECTED_COLUMNS:
        missing = [c for c in EXPECTED_COLUMNS if c not in df.columns]
        extra = [c for c in df.columns if c not in EXPECTED_COLUMNS]
        raise AnalysisError(
            f"{path}: column mismatch (missing: {missing or 'none'}, extra: {extra or 'none'})"
        )
    if df.empty:
        raise AnalysisError(f"{path}: no result rows")
    df["success"] = df["success"].astype(int).astype(bool)
    for col in ("travel_time_s", "avg_replan_time_s", "total_replan_time_s", "obstacle_speed"):
        df[col] = df[col].astype(float)
    for col in ("seed", "n_obstacles", "n_replans"):
        df[col] = df[col].astype(int)
    return df


def _planner_columns(planners: list[str]) -> list[str]:
    known = [p for p in PLANNER_ORDER if p in planners]
    rest = sorted(p for p in planners if p not in PLANNER_ORDER)
    return known + rest


@dataclass
class MedianTable:
    """Median avg replanning time per (obstacle count, speed) and planner."""

    frame: pd.DataFrame
    zero_replan_groups: set[tuple[int, float, str]] = field(default_factory=set)
    missing_groups: set[tuple[int, float, str]] = field(default_factory=set)

    def to_text(self) -> str:
        lines = ["Median of average replanning time (s):", ""]
        planners = list(self.frame.columns)
        header = f"{'group':>22} " + " ".join(
            f"{PLANNER_LABELS.get(p, p):>12}" for p in planners
        )
        lines.append(header)
        for (n_obs, speed), row in self.frame.iterrows():
            cells = []
            for p in planners:
                if (n_obs, speed, p) in self.missing_groups:
                    cells.append(f"{'n/a':>12}")
                    continue
                mark = "*" if (n_obs, speed, p) in self.zero_replan_groups else " "
                cells.append(f"{row[p]:>11.6f}{mark}")
            lines.append(f"{n_obs:>3d} obstacles, {speed:g} m/s " + " ".join(cells))
        if self.zero_replan_groups:
            lines.append("")
            lines.append("* group never replanned (median is 0 by definition)")
        if self.missing_groups:
            lines.append("")
            missing = ", ".join(
                f"({n} obstacles, {v:g} m/s, {p})" for n, v, p in sorted(self.missing_groups)
            )
            lines.append(f"missing groups: {missing}")
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        out = self.frame.reset_index()
        out.to_csv(path, index=False)


def median_table(csv_path: str | Path) -> MedianTable:
    """Median avg_replan_time_s per (n_obstacles, obstacle_speed, planner)."""
    df = load_results(csv_path)
    planners = _planner_columns(sorted(df["planner"].unique()))
    groups = df.groupby(["n_obstacles", "obstacle_speed", "planner"])
    medians = groups["avg_replan_time_s"].median()
    replan_totals = groups["n_replans"].sum()
    index = sorted(
        {(int(n), float(v)) for n, v in zip(df["n_obstacles"], df["obstacle_speed"])}
    )
    frame = pd.DataFrame(
        index=pd.MultiIndex.from_tuples(index, names=["n_obstacles", "obstacle_speed"]),
        columns=planners,
        dtype=float,
    )
    zero_groups: set[tuple[int, float, str]] = set()
    missing: set[tuple[int, float, str]] = set()
    for n_obs, speed in index:
        for p in planners:
            key = (n_obs, speed, p)
            if key in medians.index:
                frame.loc[(n_obs, speed), p] = float(medians.loc[key])
                if int(replan_totals.loc[key]) == 0:
                    zero_groups.add(key)
            else:
                missing.add(key)
    return MedianTable(frame=frame, zero_replan_groups=zero_groups, missing_groups=missing)
