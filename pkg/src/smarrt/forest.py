"""Search forest: node storage, nearest-neighbor queries, steering, pruning
into fragments, floodfill component labeling, and path extraction.

Node ids increase monotonically and are never reused, which keeps nearest-tie
resolution and traces deterministic. The spatial index is a uniform hash grid
with bucket size equal to the steering step.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable

from .geometry import Point2, dist

__all__ = ["Node", "SearchForest", "steer"]


class Node:
    """A forest node; parent/child links always stay mutually consistent."""

    __slots__ = ("position", "parent", "children", "tree_label")

    def __init__(self, position: Point2, parent: int | None, tree_label: int) -> None:
        self.position = position
        self.parent = parent
        self.children: set[int] = set()
        self.tree_label = tree_label

    def __repr__(self) -> str:
        return (
            f"Node(pos=({self.position.x:.3f},{self.position.y:.3f}), "
            f"parent={self.parent}, label={self.tree_label})"
        )


def steer(from_pt: Point2, to_pt: Point2, step: float) -> Point2:
    """Move from `from_pt` toward `to_pt` by at most `step` meters."""
    if step <= 0.0:
        raise ValueError(f"steer step must be > 0, got {step}")
    d = dist(from_pt, to_pt)
    if d <= step:
        return to_pt
    f = step / d
    return Point2(from_pt.x + (to_pt.x - from_pt.x) * f, from_pt.y + (to_pt.y - from_pt.y) * f)


class SearchForest:
    """Goal- or robot-rooted search trees that may fracture into fragments."""

    def __init__(self, grid_cell: float = 2.0) -> None:
        if grid_cell <= 0.0:
            raise ValueError("grid cell must be > 0")
        self.nodes: dict[int, Node] = {}
        self.roots: set[int] = set()
        self._cell = grid_cell
        self._grid: dict[tuple[int, int], set[int]] = {}
        # Occupied-bucket bounding box; only ever grown (a stale, larger box
        # keeps nearest() correct, just bounds its ring scan less tightly).
        self._bbox: list[int] | None = None
        self._next_id = 0
        self._next_label = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.nodes

    # ------------------------------------------------------------------
    # Structure edits
    # ------------------------------------------------------------------

    def insert(self, p: Point2, parent: int | None = None) -> int:
        """Add a node; label inherited from the parent, fresh for a new root."""
        if parent is not None:
            try:
                parent_node = self.nodes[parent]
            except KeyError:
                raise KeyError(f"unknown parent node id {parent}") from None
            label = parent_node.tree_label
        else:
            label = self._next_label
            self._next_label += 1
        node_id = self._next_id
        self._next_id += 1
        self.nodes[node_id] = Node(p, parent, label)
        if parent is None:
            self.roots.add(node_id)
        else:
            self.nodes[parent].children.add(node_id)
        bucket = self._bucket(p)
        self._grid.setdefault(bucket, set()).add(node_id)
        if self._bbox is None:
            self._bbox = [bucket[0], bucket[0], bucket[1], bucket[1]]
        else:
            bb = self._bbox
            bb[0] = min(bb[0], bucket[0])
            bb[1] = max(bb[1], bucket[0])
            bb[2] = min(bb[2], bucket[1])
            bb[3] = max(bb[3], bucket[1])
        return node_id

    def prune(self, victims: Iterable[int]) -> int:
        """Remove victims; surviving children become fragment roots."""
        vic = set(victims)
        for v in vic:
            if v not in self.nodes:
                raise KeyError(f"cannot prune unknown node id {v}")
        for v in vic:
            node = self.nodes[v]
            for c in node.children:
                if c not in vic:
                    self.nodes[c].parent = None
                    self.roots.add(c)
            if node.parent is not None and node.parent not in vic:
                self.nodes[node.parent].children.discard(v)
            self.roots.discard(v)
            bucket = self._bucket(node.position)
            cell = self._grid[bucket]
            cell.discard(v)
            if not cell:
                del self._grid[bucket]
            del self.nodes[v]
        return len(vic)

    def reparent(self, child: int, new_parent: int) -> list[int]:
        """Hang `child` (and its subtree) under `new_parent`.

        The subtree takes the new parent's label; returns relabeled node ids.
        Raises ValueError when the edit would create a cycle.
        """
        if child not in self.nodes:
            raise KeyError(f"unknown node id {child}")
        if new_parent not in self.nodes:
            raise KeyError(f"unknown node id {new_parent}")
        subtree = self._subtree_ids(child)
        if new_parent in subtree:
            raise ValueError(f"reparenting {child} under {new_parent} would create a cycle")
        node = self.nodes[child]
        if node.parent is not None:
            self.nodes[node.parent].children.discard(child)
        else:
            self.roots.discard(child)
        node.parent = new_parent
        self.nodes[new_parent].children.add(child)
        label = self.nodes[new_parent].tree_label
        for nid in subtree:
            self.nodes[nid].tree_label = label
        return subtree

    def reroot(self, node_id: int) -> None:
        """Make node_id the root of its component by reversing its root chain."""
        if node_id not in self.nodes:
            raise KeyError(f"unknown node id {node_id}")
        chain = [node_id]
        cur = self.nodes[node_id].parent
        while cur is not None:
            chain.append(cur)
            cur = self.nodes[cur].parent
        old_root = chain[-1]
        if old_root == node_id:
            return
        for up, down in zip(chain[1:], chain[:-1]):
            up_node = self.nodes[up]
            down_node = self.nodes[down]
            up_node.children.discard(down)
            up_node.parent = down
            down_node.children.add(up)
        self.nodes[node_id].parent = None
        self.roots.discard(old_root)
        self.roots.add(node_id)

    def floodfill_relabel(self) -> int:
        """Relabel connected components 0..k-1 in first-visit (id) order."""
        labels: dict[int, int] = {}
        k = 0
        for start in sorted(self.nodes):
            if start in labels:
                continue
            stack = [start]
            labels[start] = k
            while stack:
                nid = stack.pop()
                node = self.nodes[nid]
                neighbors = node.children if node.parent is None else (*node.children, node.parent)
                for other in neighbors:
                    if other not in labels:
                        labels[other] = k
                        stack.append(other)
            k += 1
        for nid, label in labels.items():
            self.nodes[nid].tree_label = label
        self._next_label = k
        return k

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def nearest(self, p: Point2, where: Callable[[int], bool] | None = None) -> int:
        """Live node minimizing Euclidean distance to p; ties -> smallest id."""
        if not self.nodes:
            raise LookupError("nearest() on an empty forest")
        cell = self._cell
        qx, qy = self._bucket(p)
        assert self._bbox is not None
        min_ix, max_ix, min_iy, max_iy = self._bbox
        max_ring = max(
            abs(qx - min_ix), abs(qx - max_ix), abs(qy - min_iy), abs(qy - max_iy)
        )
        best_id = -1
        best = (math.inf, -1)
        for ring in range(max_ring + 1):
            if best_id >= 0 and (ring - 1) * cell > best[0]:
                break
            for bucket in self._ring_buckets(qx, qy, ring):
                ids = self._grid.get(bucket)
                if not ids:
                    continue
                for nid in ids:
                    if where is not None and not where(nid):
                        continue
                    cand = (dist(p, self.nodes[nid].position), nid)
                    if cand < best:
                        best = cand
                        best_id = nid
        if best_id < 0:
            raise LookupError("no node satisfies the nearest() filter")
        return best_id

    def near(self, p: Point2, radius: float) -> list[int]:
        """All live nodes within the closed disk of the given radius."""
        if radius < 0.0:
            return []
        cell = self._cell
        ix0 = math.floor((p.x - radius) / cell)
        ix1 = math.floor((p.x + radius) / cell)
        iy0 = math.floor((p.y - radius) / cell)
        iy1 = math.floor((p.y + radius) / cell)
        out: list[int] = []
        for ix in range(ix0, ix1 + 1):
            for iy in range(iy0, iy1 + 1):
                ids = self._grid.get((ix, iy))
                if not ids:
                    continue
                for nid in ids:
                    if dist(p, self.nodes[nid].position) <= radius:
                        out.append(nid)
        out.sort()
        return out

    def extract_path(self, leaf: int) -> list[Point2]:
        """Positions from leaf up through parents to its root, inclusive."""
        return [self.nodes[nid].position for nid in self.path_to_root_ids(leaf)]

    def path_to_root_ids(self, leaf: int) -> list[int]:
        if leaf not in self.nodes:
            raise KeyError(f"unknown node id {leaf}")
        ids = [leaf]
        cur = self.nodes[leaf].parent
        while cur is not None:
            ids.append(cur)
            cur = self.nodes[cur].parent
        return ids

    def path_length_to_root(self, leaf: int) -> float:
        total = 0.0
        cur = self.nodes[leaf]
        while cur.parent is not None:
            nxt = self.nodes[cur.parent]
            total += dist(cur.position, nxt.position)
            cur = nxt
        return total

    def root_of(self, node_id: int) -> int:
        cur = node_id
        while self.nodes[cur].parent is not None:
            cur = self.nodes[cur].parent
        return cur

    def labels(self) -> set[int]:
        return {node.tree_label for node in self.nodes.values()}

    def subtree_ids(self, node_id: int) -> list[int]:
        """node_id plus all its descendants (children links only)."""
        if node_id not in self.nodes:
            raise KeyError(f"unknown node id {node_id}")
        return self._subtree_ids(node_id)

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _bucket(self, p: Point2) -> tuple[int, int]:
        return (math.floor(p.x / self._cell), math.floor(p.y / self._cell))

    def _ring_buckets(self, qx: int, qy: int, ring: int):
        if ring == 0:
            yield (qx, qy)
            return
        for ix in range(qx - ring, qx + ring + 1):
            yield (ix, qy - ring)
            yield (ix, qy + ring)
        for iy in range(qy - ring + 1, qy + ring):
            yield (qx - ring, iy)
            yield (qx + ring, iy)

    def _subtree_ids(self, node_id: int) -> list[int]:
        out = [node_id]
        stack = [node_id]
        while stack:
            nid = stack.pop()
            for c in self.nodes[nid].children:
                out.append(c)
                stack.append(c)
        return out
