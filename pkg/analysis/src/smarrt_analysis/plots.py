"""Campaign figures: travel-time and replanning-time box plots, success bars.

One figure per obstacle count with three panels, grouped by obstacle speed
and planner. Replanning times span orders of magnitude, so that panel uses a
log scale (zero-replan trials are left out of the boxes).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

from .tables import PLANNER_LABELS, _planner_columns, load_results

__all__ = ["plot_campaign"]

_COLORS = {
    "smarrt": "#d62728",
    "errt": "#1f77b4",
    "drrt": "#2ca02c",
    "mprrt": "#9467bd",
    "ebgrrt": "#ff7f0e",
}
_FALLBACK = ["#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _color(planner: str, idx: int) -> str:
    return _COLORS.get(planner, _FALLBACK[idx % len(_FALLBACK)])


def _grouped_boxes(ax, df: pd.DataFrame, value_col: str, planners: list[str], speeds: list[float]):
    width = 0.8 / max(len(planners), 1)
    for pi, planner in enumerate(planners):
        positions = []
        data = []
        for si, speed in enumerate(speeds):
            values = df[(df["planner"] == planner) & (df["obstacle_speed"] == speed)][
                value_col
            ].to_numpy()
            if len(values) == 0:
                continue
            positions.append(si + (pi - (len(planners) - 1) / 2) * width)
            data.append(values)
        if not data:
            continue
        boxes = ax.boxplot(
            data,
            positions=positions,
            widths=width * 0.9,
            patch_artist=True,
            showfliers=False,
            medianprops={"color": "black"},
        )
        for patch in boxes["boxes"]:
            patch.set_facecolor(_color(planner, pi))
            patch.set_alpha(0.75)
    ax.set_xticks(range(len(speeds)))
    ax.set_xticklabels([f"{s:g}" for s in speeds])
    ax.set_xlabel("obstacle speed (m/s)")


def plot_campaign(csv_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Write one three-panel figure per obstacle count; returns the paths."""
    df = load_results(csv_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    planners = _planner_columns(sorted(df["planner"].unique()))
    written: list[Path] = []
    for n_obs in sorted(df["n_obstacles"].unique()):
        sub = df[df["n_obstacles"] == n_obs]
        speeds = sorted(sub["obstacle_speed"].unique())
        fig, (ax_travel, ax_replan, ax_rate) = plt.subplots(1, 3, figsize=(15, 4.2))

        _grouped_boxes(ax_travel, sub[sub["success"]], "travel_time_s", planners, speeds)
        ax_travel.set_ylabel("travel time (s)")
        ax_travel.set_title(f"travel time, {n_obs} obstacles (successful trials)")

        replanned = sub[sub["avg_replan_time_s"] > 0]
        _grouped_boxes(ax_replan, replanned, "avg_replan_time_s", planners, speeds)
        ax_replan.set_yscale("log")
        ax_replan.set_ylabel("average replanning time (s)")
        ax_replan.set_title(f"replanning time, {n_obs} obstacles")

        width = 0.8 / max(len(planners), 1)
        for pi, planner in enumerate(planners):
            xs, rates = [], []
            for si, speed in enumerate(speeds):
                g = sub[(sub["planner"] == planner) & (sub["obstacle_speed"] == speed)]
                if g.empty:
                    continue
                xs.append(si + (pi - (len(planners) - 1) / 2) * width)
                rates.append(g["success"].mean())
            ax_rate.bar(
                xs,
                rates,
                width=width * 0.9,
                color=_color(planner, pi),
                label=PLANNER_LABELS.get(planner, planner),
            )
        ax_rate.set_xticks(range(len(speeds)))
        ax_rate.set_xticklabels([f"{s:g}" for s in speeds])
        ax_rate.set_xlabel("obstacle speed (m/s)")
        ax_rate.set_ylim(0, 1.05)
        ax_rate.set_ylabel("success rate")
        ax_rate.set_title(f"success rate, {n_obs} obstacles")
        ax_rate.legend(fontsize=8)

        fig.tight_layout()
        path = out / f"campaign_obstacles_{n_obs}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
