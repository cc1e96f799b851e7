"""Multi-resolution map: tiling structure, indexing, validity, utility, search."""

import random

import pytest

from smarrt.geometry import Point2, Rect
from smarrt.utility_map import CellIndex, MultiResolutionMap


def square_map(side=32.0, min_cell=1.0):
    return MultiResolutionMap(Rect(Point2(0, 0), Point2(side, side)), min_cell)


# ----------------------------------------------------------------------
# build
# ----------------------------------------------------------------------


def test_build_32x32_structure():
    m = square_map(32.0, 1.0)
    assert m.level_cell_counts() == [1024, 256, 64, 16, 4]
    assert m.top_level == 4


def test_build_minimal_4x4():
    m = square_map(4.0, 1.0)
    assert m.level_cell_counts() == [16, 4]
    assert m.top_level == 1


def test_build_pads_non_power_of_two():
    m = MultiResolutionMap(Rect(Point2(0, 0), Point2(33, 32)), 1.0)
    assert m.size == 64
    assert m.level_cell_counts()[0] == 64 * 64
    # Padding cells can never become valid.
    m.index_node(0, Point2(32.5, 10.5), 0)
    m.index_node(1, Point2(32.6, 10.6), 1)
    m.mark_validity()
    assert m.is_valid_cell(CellIndex(0, 32, 10))
    assert not m.is_valid_cell(CellIndex(0, 40, 10))


def test_build_rejects_non_positive_cell():
    with pytest.raises(ValueError):
        square_map(32.0, 0.0)


# ----------------------------------------------------------------------
# indexing
# ----------------------------------------------------------------------


def test_index_node_floor_rule():
    m = square_map()
    cell = m.cell_of(Point2(2.5, 30.5))
    assert (cell.ix, cell.iy) == (2, 30)


def test_index_interior_boundary_goes_to_higher_cell():
    m = square_map()
    cell = m.cell_of(Point2(3.0, 5.0))
    assert (cell.ix, cell.iy) == (3, 5)


def test_outer_edge_joins_last_cell():
    m = square_map()
    cell = m.cell_of(Point2(32.0, 32.0))
    assert (cell.ix, cell.iy) == (31, 31)


def test_remove_only_node_empties_cell():
    m = square_map()
    m.index_node(7, Point2(4.5, 4.5), 2)
    assert m.cell_labels(CellIndex(0, 4, 4)) == {2}
    m.remove_node(7, Point2(4.5, 4.5))
    assert m.cell_labels(CellIndex(0, 4, 4)) == set()


def test_index_outside_bounds_raises():
    m = square_map()
    with pytest.raises(ValueError):
        m.index_node(0, Point2(40, 4), 0)
    with pytest.raises(KeyError):
        m.remove_node(99, Point2(4, 4))


def test_index_node_upserts_label():
    m = square_map()
    m.index_node(7, Point2(4.5, 4.5), 2)
    m.index_node(7, Point2(4.5, 4.5), 5)
    assert m.cell_labels(CellIndex(0, 4, 4)) == {5}


def test_partition_every_point_in_exactly_one_cell():
    m = square_map(8.0, 1.0)
    rng = random.Random(4)
    for _ in range(500):
        p = Point2(rng.uniform(0, 8), rng.uniform(0, 8))
        cell = m.cell_of(p)
        rect = m.cell_rect(cell)
        assert rect.min.x <= p.x <= rect.max.x and rect.min.y <= p.y <= rect.max.y
        # Children of the enclosing coarse cell tile it exactly.
        coarse = m.cell_of(p, level=1)
        assert coarse.ix == cell.ix // 2 and coarse.iy == cell.iy // 2


# ----------------------------------------------------------------------
# validity
# ----------------------------------------------------------------------


def test_cell_with_two_labels_is_valid():
    m = square_map()
    m.index_node(0, Point2(4.2, 4.2), 0)
    m.index_node(1, Point2(4.8, 4.8), 1)
    m.mark_validity()
    assert m.is_valid_cell(CellIndex(0, 4, 4))


def test_empty_cell_between_two_labeled_neighbors_is_valid():
    m = square_map()
    m.index_node(0, Point2(3.5, 4.5), 0)  # cell (3,4)
    m.index_node(1, Point2(5.5, 4.5), 1)  # cell (5,4)
    m.mark_validity()
    assert m.is_valid_cell(CellIndex(0, 4, 4))


def test_isolated_single_label_cell_is_invalid():
    m = square_map()
    m.index_node(0, Point2(4.5, 4.5), 0)
    m.index_node(1, Point2(4.6, 4.4), 0)
    m.mark_validity()
    assert not m.is_valid_cell(CellIndex(0, 4, 4))


def test_validity_monotone_under_add_and_remove():
    rng = random.Random(8)
    m = square_map(16.0, 1.0)
    placed = []
    for nid in range(60):
        p = Point2(rng.uniform(0, 16), rng.uniform(0, 16))
        m.index_node(nid, p, rng.randrange(3))
        placed.append((nid, p))
    m.mark_validity()
    before = {
        (ix, iy)
        for ix in range(m.size)
        for iy in range(m.size)
        if m.is_valid_cell(CellIndex(0, ix, iy))
    }
    m.index_node(1000, Point2(8.5, 8.5), 7)
    m.mark_validity()
    after = {
        (ix, iy)
        for ix in range(m.size)
        for iy in range(m.size)
        if m.is_valid_cell(CellIndex(0, ix, iy))
    }
    assert before <= after  # adding a node never flips V -> I
    m.remove_node(1000, Point2(8.5, 8.5))
    m.mark_validity()
    again = {
        (ix, iy)
        for ix in range(m.size)
        for iy in range(m.size)
        if m.is_valid_cell(CellIndex(0, ix, iy))
    }
    assert again == before  # removing it restores the exact previous set


# ----------------------------------------------------------------------
# utilities
# ----------------------------------------------------------------------


def test_utility_closed_form_three_four_five():
    # Bounds shifted so a cell center lands exactly on (3, 4): the route
    # (0,0) -> (3,4) -> (6,8) has length 5 + 5, so the utility is 0.1.
    m = MultiResolutionMap(Rect(Point2(0.5, 1.5), Point2(8.5, 9.5)), 1.0)
    m.index_node(0, Point2(2.8, 3.8), 0)
    m.index_node(1, Point2(3.2, 4.2), 1)
    m.mark_validity()
    cell = CellIndex(0, 2, 2)
    assert m.cell_center(cell) == Point2(3.0, 4.0)
    assert m.is_valid_cell(cell)
    m.compute_utilities(Point2(0, 0), Point2(6, 8))
    assert m.utility(cell) == pytest.approx(0.1, rel=1e-12)


def test_invalid_cells_have_zero_utility():
    m = square_map(16.0, 1.0)
    m.index_node(0, Point2(3.5, 4.5), 0)
    m.mark_validity()
    m.compute_utilities(Point2(0, 0), Point2(6, 8))
    for ix in range(16):
        for iy in range(16):
            assert m.utility(CellIndex(0, ix, iy)) == 0.0


def test_coarse_utility_is_max_of_children():
    m = square_map(16.0, 1.0)
    rng = random.Random(12)
    for nid in range(80):
        m.index_node(
            nid,
            Point2(rng.uniform(0, 16), rng.uniform(0, 16)),
            rng.randrange(4),
        )
    m.mark_validity()
    m.compute_utilities(Point2(1, 1), Point2(14, 14))
    for level in range(1, m.top_level + 1):
        n = m.size >> level
        for ix in range(n):
            for iy in range(n):
                children = [
                    m.utility(CellIndex(level - 1, 2 * ix + dx, 2 * iy + dy))
                    for dx in (0, 1)
                    for dy in (0, 1)
                ]
                assert m.utility(CellIndex(level, ix, iy)) == max(children)


def test_utility_positive_iff_valid():
    m = square_map(16.0, 1.0)
    rng = random.Random(3)
    for nid in range(50):
        m.index_node(nid, Point2(rng.uniform(0, 16), rng.uniform(0, 16)), rng.randrange(3))
    m.mark_validity()
    m.compute_utilities(Point2(0, 0), Point2(16, 16))
    for ix in range(16):
        for iy in range(16):
            cell = CellIndex(0, ix, iy)
            assert (m.utility(cell) > 0) == m.is_valid_cell(cell)


# ----------------------------------------------------------------------
# sampling-cell search
# ----------------------------------------------------------------------


from helpers import oracle_search as _oracle_search


def test_search_adjacent_valid_cell_found_at_level_zero():
    m = square_map(16.0, 1.0)
    m.index_node(0, Point2(5.5, 5.5), 0)
    m.index_node(1, Point2(5.6, 5.4), 1)
    m.mark_validity()
    m.compute_utilities(Point2(4.5, 5.5), Point2(14, 14))
    got = m.search_sampling_cell(m.cell_of(Point2(4.5, 5.5)))
    assert got is not None and got.level == 0
    assert m.is_valid_cell(got)
    # The valid cluster sits in the 3x3 neighborhood, so no ascent happened.
    assert abs(got.ix - 4) <= 1 and abs(got.iy - 5) <= 1


def test_search_ascends_when_neighborhood_empty():
    m = square_map(16.0, 1.0)
    # Valid cells far from the robot cell (outside its 3x3 at level 0).
    m.index_node(0, Point2(9.5, 2.5), 0)
    m.index_node(1, Point2(9.6, 2.4), 1)
    m.mark_validity()
    m.compute_utilities(Point2(1.5, 1.5), Point2(14, 14))
    robot_cell = m.cell_of(Point2(1.5, 1.5))
    got = m.search_sampling_cell(robot_cell)
    assert got == _oracle_search(m, robot_cell)
    assert got is not None and m.is_valid_cell(got)


def test_search_all_zero_returns_none():
    m = square_map(16.0, 1.0)
    m.mark_validity()
    m.compute_utilities(Point2(1, 1), Point2(14, 14))
    assert m.search_sampling_cell(m.cell_of(Point2(1, 1))) is None


def test_search_matches_oracle_on_random_maps():
    rng = random.Random(99)
    for _ in range(100):
        m = square_map(16.0, 1.0)
        nid = 0
        for _ in range(rng.randrange(0, 60)):
            m.index_node(
                nid,
                Point2(rng.uniform(0, 16), rng.uniform(0, 16)),
                rng.randrange(4),
            )
            nid += 1
        m.mark_validity()
        p_c = Point2(rng.uniform(0, 16), rng.uniform(0, 16))
        p_g = Point2(rng.uniform(0, 16), rng.uniform(0, 16))
        m.compute_utilities(p_c, p_g)
        robot_cell = m.cell_of(p_c)
        masked = frozenset(
            (rng.randrange(16), rng.randrange(16)) for _ in range(rng.randrange(0, 4))
        )
        assert m.search_sampling_cell(robot_cell, masked) == _oracle_search(
            m, robot_cell, masked
        )


def test_search_argmax_invariant_under_uniform_scaling():
    rng = random.Random(41)
    base = square_map(16.0, 1.0)
    scaled = MultiResolutionMap(Rect(Point2(0, 0), Point2(32, 32)), 2.0)
    for nid in range(40):
        x, y = rng.uniform(0, 16), rng.uniform(0, 16)
        label = rng.randrange(3)
        base.index_node(nid, Point2(x, y), label)
        scaled.index_node(nid, Point2(2 * x, 2 * y), label)
    base.mark_validity()
    scaled.mark_validity()
    p_c, p_g = Point2(2, 3), Point2(14, 12)
    base.compute_utilities(p_c, p_g)
    scaled.compute_utilities(Point2(4, 6), Point2(28, 24))
    a = base.search_sampling_cell(base.cell_of(p_c))
    b = scaled.search_sampling_cell(scaled.cell_of(Point2(4, 6)))
    assert (a is None) == (b is None)
    if a is not None:
        assert (a.ix, a.iy) == (b.ix, b.iy)


def test_utility_grids_shape():
    m = square_map(8.0, 1.0)
    grids = m.utility_grids()
    assert [len(g) * len(g[0]) for g in grids] == m.level_cell_counts()
