"""Shared independent oracles used by the unit and acceptance suites."""

from smarrt.utility_map import CellIndex, MultiResolutionMap


def union_find_partition(forest) -> list[set[int]]:
    """Connected components of the surviving edge set, via union-find."""
    uf = {nid: nid for nid in forest.nodes}

    def find(x):
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    for nid, node in forest.nodes.items():
        if node.parent is not None:
            uf[find(nid)] = find(node.parent)
    by_root: dict[int, set[int]] = {}
    for nid in forest.nodes:
        by_root.setdefault(find(nid), set()).add(nid)
    return sorted(by_root.values(), key=min)


def label_partition(forest) -> list[set[int]]:
    by_label: dict[int, set[int]] = {}
    for nid, node in forest.nodes.items():
        by_label.setdefault(node.tree_label, set()).add(nid)
    return sorted(by_label.values(), key=min)


def oracle_search(m: MultiResolutionMap, robot_cell: CellIndex, masked=frozenset()):
    """Exhaustive reimplementation of the hierarchical sampling-cell search:
    scan 3x3 neighborhoods finest-first, then descend through child argmaxes,
    ties toward the smallest (iy, ix)."""
    u0 = [[m.utility(CellIndex(0, ix, iy)) for ix in range(m.size)] for iy in range(m.size)]
    if masked:
        u0 = [row[:] for row in u0]
        for ix, iy in masked:
            u0[iy][ix] = 0.0
    utils = [u0]
    size = m.size
    for _ in range(1, m.top_level + 1):
        size //= 2
        prev = utils[-1]
        utils.append(
            [
                [
                    max(
                        prev[2 * iy][2 * ix],
                        prev[2 * iy][2 * ix + 1],
                        prev[2 * iy + 1][2 * ix],
                        prev[2 * iy + 1][2 * ix + 1],
                    )
                    for ix in range(size)
                ]
                for iy in range(size)
            ]
        )
    for level in range(m.top_level + 1):
        n = m.size >> level
        cx, cy = robot_cell.ix >> level, robot_cell.iy >> level
        best = None
        for iy in range(max(cy - 1, 0), min(cy + 2, n)):
            for ix in range(max(cx - 1, 0), min(cx + 2, n)):
                u = utils[level][iy][ix]
                if u > 0 and (best is None or u > best[0]):
                    best = (u, ix, iy)
        if best is None:
            continue
        _, ix, iy = best
        for lvl in range(level - 1, -1, -1):
            cand = None
            for dy in (0, 1):
                for dx in (0, 1):
                    u = utils[lvl][2 * iy + dy][2 * ix + dx]
                    if cand is None or u > cand[0]:
                        cand = (u, 2 * ix + dx, 2 * iy + dy)
            _, ix, iy = cand
        return CellIndex(0, ix, iy)
    return None
