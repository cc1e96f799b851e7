"""Multi-resolution utility map over a square power-of-two tiling.

Level 0 is the finest grid; each coarser level aggregates 2x2 blocks of the
level below, ending at a 2x2 top level. Level-0 cells index forest nodes and
their component labels; a cell is valid (a promising repair site) when its
3x3 neighborhood holds nodes from at least two distinct components. Cell
utility is the reciprocal of the route length robot -> cell center -> goal,
and coarse utilities are the max over children.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Point2, Rect

__all__ = ["CellIndex", "MultiResolutionMap"]


@dataclass(frozen=True, slots=True)
class CellIndex:
    level: int
    ix: int
    iy: int


def _next_power_of_two(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


class MultiResolutionMap:
    """Hierarchical tiling of the workspace indexing forest nodes per cell."""

    def __init__(self, bounds: Rect, min_cell: float) -> None:
        if min_cell <= 0.0:
            raise ValueError(f"min_cell must be > 0, got {min_cell}")
        self.bounds = bounds
        self.min_cell = min_cell
        nx = max(1, math.ceil(bounds.width / min_cell - 1e-9))
        ny = max(1, math.ceil(bounds.height / min_cell - 1e-9))
        self.size = _next_power_of_two(max(nx, ny, 4))
        self.top_level = int(math.log2(self.size)) - 1
        # Usable = overlaps the original workspace; padding cells stay invalid.
        self._usable = np.zeros((self.size, self.size), dtype=bool)
        self._usable[:ny, :nx] = True
        self._entries: dict[tuple[int, int], dict[int, int]] = {}
        self._valid = np.zeros((self.size, self.size), dtype=bool)
        self._util: list[np.ndarray] = [
            np.zeros((self.size >> lvl, self.size >> lvl), dtype=np.float64)
            for lvl in range(self.top_level + 1)
        ]

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    def level_cell_counts(self) -> list[int]:
        return [(self.size >> lvl) ** 2 for lvl in range(self.top_level + 1)]

    def cell_of(self, p: Point2, level: int = 0) -> CellIndex:
        """Containing cell; half-open cells, the outer edge joins the last cell."""
        side = self.min_cell * (1 << level)
        n = self.size >> level
        ix = min(int((p.x - self.bounds.min.x) // side), n - 1)
        iy = min(int((p.y - self.bounds.min.y) // side), n - 1)
        return CellIndex(level, ix, iy)

    def cell_center(self, cell: CellIndex) -> Point2:
        side = self.min_cell * (1 << cell.level)
        return Point2(
            self.bounds.min.x + (cell.ix + 0.5) * side,
            self.bounds.min.y + (cell.iy + 0.5) * side,
        )

    def cell_rect(self, cell: CellIndex) -> Rect:
        """Cell extent clipped to the workspace (straddler cells shrink)."""
        side = self.min_cell * (1 << cell.level)
        x0 = self.bounds.min.x + cell.ix * side
        y0 = self.bounds.min.y + cell.iy * side
        return Rect(
            Point2(x0, y0),
            Point2(min(x0 + side, self.bounds.max.x), min(y0 + side, self.bounds.max.y)),
        )

    def _check_in_bounds(self, p: Point2) -> None:
        if not (
            self.bounds.min.x <= p.x <= self.bounds.max.x
            and self.bounds.min.y <= p.y <= self.bounds.max.y
        ):
            raise ValueError(f"point ({p.x}, {p.y}) outside map bounds")

    # ------------------------------------------------------------------
    # Node indexing
    # ------------------------------------------------------------------

    def index_node(self, node_id: int, p: Point2, label: int) -> None:
        """Record (or update) a node's label in its containing level-0 cell."""
        self._check_in_bounds(p)
        cell = self.cell_of(p)
        self._entries.setdefault((cell.ix, cell.iy), {})[node_id] = label

    def remove_node(self, node_id: int, p: Point2) -> None:
        self._check_in_bounds(p)
        cell = self.cell_of(p)
        key = (cell.ix, cell.iy)
        entries = self._entries.get(key)
        if entries is None or node_id not in entries:
            raise KeyError(f"node {node_id} is not indexed in cell {key}")
        del entries[node_id]
        if not entries:
            del self._entries[key]

    def cell_labels(self, cell: CellIndex) -> set[int]:
        entries = self._entries.get((cell.ix, cell.iy))
        return set(entries.values()) if entries else set()

    def cell_node_ids(self, cell: CellIndex) -> set[int]:
        entries = self._entries.get((cell.ix, cell.iy))
        return set(entries.keys()) if entries else set()

    # ------------------------------------------------------------------
    # Validity and utility
    # ------------------------------------------------------------------

    def mark_validity(self) -> None:
        """A level-0 cell is valid iff its 3x3 neighborhood (self included)
        holds labels from at least two distinct components."""
        n = self.size
        gathered: dict[tuple[int, int], set[int]] = {}
        for (ix, iy), entries in self._entries.items():
            labels = set(entries.values())
            if not labels:
                continue
            for nx in range(max(ix - 1, 0), min(ix + 2, n)):
                for ny in range(max(iy - 1, 0), min(iy + 2, n)):
                    acc = gathered.get((nx, ny))
                    if acc is None:
                        gathered[(nx, ny)] = set(labels)
                    else:
                        acc.update(labels)
        self._valid.fill(False)
        usable = self._usable
        valid = self._valid
        for (ix, iy), labels in gathered.items():
            if len(labels) >= 2 and usable[iy, ix]:
                valid[iy, ix] = True

    def is_valid_cell(self, cell: CellIndex) -> bool:
        return bool(self._valid[cell.iy, cell.ix])

    def compute_utilities(self, p_c: Point2, p_g: Point2) -> None:
        """Level-0 utility 1 / (d(robot, center) + d(center, goal)) on valid
        cells, zero elsewhere; each coarser cell takes its children's max."""
        u0 = self._util[0]
        u0.fill(0.0)
        ys, xs = np.nonzero(self._valid)
        if len(xs):
            cx = self.bounds.min.x + (xs + 0.5) * self.min_cell
            cy = self.bounds.min.y + (ys + 0.5) * self.min_cell
            through = np.hypot(cx - p_c.x, cy - p_c.y) + np.hypot(cx - p_g.x, cy - p_g.y)
            with np.errstate(divide="ignore"):
                u0[ys, xs] = np.where(through > 0.0, 1.0 / through, np.inf)
        self._build_pyramid(self._util)

    def _build_pyramid(self, levels: list[np.ndarray]) -> None:
        for lvl in range(1, self.top_level + 1):
            below = levels[lvl - 1]
            n = below.shape[0] // 2
            levels[lvl][...] = below.reshape(n, 2, n, 2).max(axis=(1, 3))

    def utility(self, cell: CellIndex) -> float:
        return float(self._util[cell.level][cell.iy, cell.ix])

    def utility_grids(self) -> list[list[list[float]]]:
        """Per-level utility arrays (row-major, [iy][ix]) for trace dumps."""
        return [lvl.tolist() for lvl in self._util]

    # ------------------------------------------------------------------
    # Hierarchical sampling-cell search
    # ------------------------------------------------------------------

    def search_sampling_cell(
        self, robot_cell: CellIndex, masked: frozenset[tuple[int, int]] | set[tuple[int, int]] = frozenset()
    ) -> CellIndex | None:
        """Best level-0 repair cell near the robot.

        Scans the 3x3 neighborhood of the robot's enclosing cell level by
        level (finest first); once a positive-utility cell is found, descends
        through the children argmax back to level 0. Ties break toward the
        smallest (iy, ix). `masked` level-0 cells are treated as zero.
        """
        if masked:
            levels = [self._util[0].copy()]
            for ix, iy in masked:
                levels[0][iy, ix] = 0.0
            levels.extend(
                np.zeros((self.size >> lvl, self.size >> lvl), dtype=np.float64)
                for lvl in range(1, self.top_level + 1)
            )
            self._build_pyramid(levels)
        else:
            levels = self._util
        for level in range(self.top_level + 1):
            n = self.size >> level
            cx = robot_cell.ix >> level
            cy = robot_cell.iy >> level
            grid = levels[level]
            best_u = 0.0
            best: tuple[int, int] | None = None
            for iy in range(max(cy - 1, 0), min(cy + 2, n)):
                for ix in range(max(cx - 1, 0), min(cx + 2, n)):
                    u = grid[iy, ix]
                    if u > best_u:
                        best_u = u
                        best = (ix, iy)
            if best is None:
                continue
            ix, iy = best
            for lvl in range(level - 1, -1, -1):
                grid = levels[lvl]
                child_best_u = -1.0
                child = (0, 0)
                for dy in (0, 1):
                    for dx in (0, 1):
                        cix, ciy = 2 * ix + dx, 2 * iy + dy
                        u = grid[ciy, cix]
                        if u > child_best_u:
                            child_best_u = u
                            child = (cix, ciy)
                ix, iy = child
            return CellIndex(0, ix, iy)
        return None
