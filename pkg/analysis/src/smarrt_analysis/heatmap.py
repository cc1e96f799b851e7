"""Utility-map heatmaps from trace files.

Replan records in a trace may carry the planner's per-level utility grids
(when the run was traced with utilities enabled); this renders each level as
a heatmap panel for visual inspection of the repair-cell choice.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .tables import AnalysisError

__all__ = ["load_trace", "plot_trace_heatmaps"]


def load_trace(trace_path: str | Path) -> list[dict]:
    path = Path(trace_path)
    if not path.exists():
        raise AnalysisError(f"{path}: no such file")
    records = []
    for i, line in enumerate(path.read_text().splitlines()):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise AnalysisError(f"{path}:{i + 1}: not valid JSON ({e})") from None
    if not records:
        raise AnalysisError(f"{path}: empty trace")
    return records


def plot_trace_heatmaps(trace_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render the utility grids of every replan record carrying them."""
    records = load_trace(trace_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for rec in records:
        grids = rec.get("utility")
        if not grids:
            continue
        fig, axes = plt.subplots(1, len(grids), figsize=(3.2 * len(grids), 3.2))
        if len(grids) == 1:
            axes = [axes]
        for level, (ax, grid) in enumerate(zip(axes, grids)):
            arr = np.asarray(grid, dtype=float)
            finite = arr[np.isfinite(arr)]
            vmax = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
            im = ax.imshow(
                np.clip(arr, 0.0, vmax), origin="lower", cmap="viridis", vmin=0.0, vmax=vmax
            )
            ax.set_title(f"level {level}")
            fig.colorbar(im, ax=ax, shrink=0.8)
        fig.suptitle(f"utility map at t={rec['t']:.2f}s")
        fig.tight_layout()
        path = out / f"utility_t{rec['t']:.2f}.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    if not written:
        raise AnalysisError(
            f"{trace_path}: no records carry utility grids "
            "(run the trial with utility tracing enabled)"
        )
    return written
