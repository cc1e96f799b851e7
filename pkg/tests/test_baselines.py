"""Baseline replanners: strategy-specific pruning/regrowth semantics."""

import random

import pytest

from smarrt.baselines import (
    BaselineConfig,
    DrrtPlanner,
    EbgrrtPlanner,
    ErrtPlanner,
    MprrtPlanner,
    make_planner,
)
from smarrt.environment import DynamicEnvironment, DynamicObstacle
from smarrt.geometry import Point2, Rect, Segment2, dist
from smarrt.planner import PlannerConfig


def open_env(seed=0, dynamics=None):
    return DynamicEnvironment(
        bounds=Rect(Point2(0, 0), Point2(32, 32)),
        dynamics=dynamics or [],
        rng=random.Random(seed),
    )


def build(cls, seed=1, baseline=None, **overrides):
    return cls(PlannerConfig(**overrides), random.Random(seed), baseline=baseline)


def assert_valid_path(planner, env):
    """Chain-linked waypoints, statically free segments, correct endpoints."""
    ids = planner._path.ids
    nodes = planner.forest.nodes
    for a, b in zip(ids, ids[1:]):
        assert nodes[b].parent == a or nodes[a].parent == b
    pts = [planner.robot_pos, *[nodes[n].position for n in ids]]
    for a, b in zip(pts[1:], pts[2:]):
        assert env.segment_free_static(Segment2(a, b))
    assert dist(pts[-1], planner.x_goal) <= planner.cfg.goal_tolerance


def run_ticks(planner, env, n, dt=0.05):
    last = None
    for _ in range(n):
        last = planner.tick(env, dt)
        if last.reached_goal:
            break
    return last


# ----------------------------------------------------------------------
# shared behavior
# ----------------------------------------------------------------------


@pytest.mark.parametrize("name", ["errt", "drrt", "mprrt", "ebgrrt"])
def test_baseline_reaches_goal_in_empty_world(name):
    env = open_env(seed=2)
    p = make_planner(name, PlannerConfig(), random.Random(3))
    p.initial_plan(env, Point2(2, 30), Point2(30, 2))
    assert_valid_path(p, env)
    status = run_ticks(p, env, 600)
    assert status.reached_goal


@pytest.mark.parametrize("name", ["errt", "drrt", "mprrt", "ebgrrt"])
def test_baseline_survives_moving_obstacles(name):
    dyn = [
        DynamicObstacle(Point2(16, 16), radius=1, speed=1.0),
        DynamicObstacle(Point2(10, 22), radius=1, speed=1.0),
    ]
    env = open_env(seed=4, dynamics=dyn)
    p = make_planner(name, PlannerConfig(), random.Random(5))
    p.initial_plan(env, Point2(2, 30), Point2(30, 2))
    run_ticks(p, env, 2400)
    # No crash and the forest invariants held; success not asserted here.
    assert p.robot_pos is not None


def test_unknown_planner_name_rejected():
    with pytest.raises(ValueError):
        make_planner("rrtx", PlannerConfig(), random.Random(0))


def test_baseline_config_validation():
    with pytest.raises(ValueError):
        BaselineConfig(goal_bias=0.6, waypoint_bias=0.6)
    with pytest.raises(ValueError):
        BaselineConfig(subtree_root_bias=1.5)
    with pytest.raises(ValueError):
        BaselineConfig(iteration_budget=0)


# ----------------------------------------------------------------------
# errt
# ----------------------------------------------------------------------


def test_errt_discards_tree_on_replan():
    # Park an obstacle on the path so the entire-path check fails.
    env = open_env(seed=7)
    p = build(ErrtPlanner, seed=8)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    watermark = max(p.forest.nodes)
    mid = p.path_positions()[len(p.path_positions()) // 2]
    env.dynamics.append(DynamicObstacle(mid, radius=1.5, speed=0.0))
    status = p.tick(env, 0.05)
    assert status.replanned_this_tick
    assert status.replan_succeeded
    assert min(p.forest.nodes) > watermark  # full discard
    assert_valid_path(p, env)


def test_errt_feasible_path_not_replanned():
    env = open_env(seed=7)
    p = build(ErrtPlanner, seed=8)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    status = p.tick(env, 0.05)
    assert not status.replanned_this_tick


def test_errt_sampling_mix_with_empty_cache():
    env = open_env(seed=9)
    p = build(ErrtPlanner, seed=10)
    # No previous path cached: draws fall back to goal/uniform only.
    for _ in range(200):
        t = p._draw_target(env, Point2(30, 30))
        assert 0 <= t.x <= 32 and 0 <= t.y <= 32


def test_errt_single_label_after_tick():
    env = open_env(seed=7)
    p = build(ErrtPlanner, seed=8)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    mid = p.path_positions()[len(p.path_positions()) // 2]
    env.dynamics.append(DynamicObstacle(mid, radius=1.5, speed=0.0))
    p.tick(env, 0.05)
    assert len(p.forest.labels()) == 1


# ----------------------------------------------------------------------
# drrt
# ----------------------------------------------------------------------


def test_drrt_prunes_descendants():
    env = open_env(seed=11)
    p = build(DrrtPlanner, seed=12)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    # Pick a mid-path node; everything below it (away from the goal root)
    # must go when it collides.
    ids = p._path.ids
    mid_id = ids[len(ids) // 2]
    mid_pos = p.forest.nodes[mid_id].position
    doomed = set(p.forest.subtree_ids(mid_id))
    env.dynamics.append(DynamicObstacle(mid_pos, radius=0.2, speed=0.0))
    p.tick(env, 0.05)
    assert not (doomed & set(p.forest.nodes))
    # Still a single goal-rooted tree.
    assert len(p.forest.roots) == 1


def test_drrt_no_colliding_nodes_no_change():
    env = open_env(seed=11)
    p = build(DrrtPlanner, seed=12)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    before = set(p.forest.nodes)
    status = p.tick(env, 0.05)
    assert not status.replanned_this_tick
    assert set(p.forest.nodes) == before


def test_drrt_goal_covered_fails_replan_and_holds():
    env = open_env(seed=11)
    p = build(DrrtPlanner, seed=12)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    env.dynamics.append(DynamicObstacle(Point2(30, 16), radius=2.0, speed=0.0))
    pos_before = p.robot_pos
    status = p.tick(env, 0.05)
    assert status.replanned_this_tick
    assert not status.replan_succeeded
    assert p.robot_pos == pos_before  # held position
    assert p.goal_id in p.forest  # the root is never pruned


# ----------------------------------------------------------------------
# mprrt
# ----------------------------------------------------------------------


def test_mprrt_reuses_fragment_via_root_splice():
    env = open_env(seed=13)
    p = build(MprrtPlanner, seed=14)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    ids = p._path.ids
    cut_id = ids[len(ids) // 2]
    cut_pos = p.forest.nodes[cut_id].position
    downstream = set(p.forest.subtree_ids(cut_id)) - {cut_id}
    env.dynamics.append(DynamicObstacle(cut_pos, radius=0.2, speed=0.0))
    status = p.tick(env, 0.05)
    assert status.replanned_this_tick and status.replan_succeeded
    # The goal-side fragment was reused, not regrown: survivors persist.
    assert downstream & set(p.forest.nodes)
    assert_valid_path(p, env)


def test_mprrt_multi_label_allowed_after_maintenance():
    env = open_env(seed=13)
    p = build(MprrtPlanner, seed=14)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    # Collide an off-path node: fragments form but the path survives, so
    # no replan runs and the fragments persist through the tick.
    off_path = None
    path_ids = set(p._path.ids)
    for nid, node in p.forest.nodes.items():
        if nid not in path_ids and node.children and node.parent is not None:
            if all(c not in path_ids for c in p.forest.subtree_ids(nid)):
                off_path = nid
                break
    assert off_path is not None
    env.dynamics.append(
        DynamicObstacle(p.forest.nodes[off_path].position, radius=0.2, speed=0.0)
    )
    status = p.tick(env, 0.05)
    assert not status.replanned_this_tick
    assert len(p.forest.labels()) >= 2


def test_mprrt_plain_growth_without_fragments():
    env = open_env(seed=15)
    p = build(MprrtPlanner, seed=16)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    # Invalidate the whole tree region around the robot-side path without
    # fragments surviving nearby: prune everything, then force a replan.
    p.forest.prune(list(p.forest.nodes))
    p.clear_path()
    status = p.tick(env, 0.05)
    assert status.replanned_this_tick and status.replan_succeeded
    assert_valid_path(p, env)


def test_mprrt_wall_of_zones_blocks_fragment_reuse_but_uniform_growth_succeeds():
    # Zones wall off the old path's fragment; growth must route around.
    env = open_env(seed=17)
    p = build(MprrtPlanner, seed=18)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    for y in (12.0, 16.0, 20.0):
        env.dynamics.append(DynamicObstacle(Point2(16.0, y), radius=2.0, speed=0.0))
    status = run_ticks(p, env, 2400)
    assert status.reached_goal


# ----------------------------------------------------------------------
# ebgrrt
# ----------------------------------------------------------------------


def test_ebgrrt_reuses_goal_connected_remnant():
    env = open_env(seed=19)
    p = build(EbgrrtPlanner, seed=20)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    pts = p.path_positions()
    cut = pts[len(pts) // 2]
    goal_side_before = {
        (round(q.x, 9), round(q.y, 9)) for q in pts if q.x > cut.x + 2.0
    }
    env.dynamics.append(DynamicObstacle(cut, radius=1.0, speed=0.0))
    status = p.tick(env, 0.05)
    assert status.replanned_this_tick and status.replan_succeeded
    after = {(round(q.x, 9), round(q.y, 9)) for q in p.path_positions()}
    # The downstream half of the old path is spliced into the new one.
    assert goal_side_before <= after
    assert_valid_path(p, env)


def test_ebgrrt_remnant_fully_invalidated_regrows_like_errt():
    env = open_env(seed=21)
    p = build(EbgrrtPlanner, seed=22)
    p.initial_plan(env, Point2(2, 16), Point2(30, 16))
    watermark = max(p.forest.nodes)
    # A zone containing the goal waypoint (but not covering the whole goal
    # tolerance disk) empties the remnant: full ERRT-style regrowth.
    env.dynamics.append(DynamicObstacle(Point2(30.8, 16.0), radius=1.0, speed=0.0))
    status = p.tick(env, 0.05)
    assert status.replanned_this_tick and status.replan_succeeded
    assert min(p.forest.nodes) > watermark  # nothing reused
    assert_valid_path(p, env)


def test_ebgrrt_single_label_after_any_tick():
    dyn = [DynamicObstacle(Point2(16, 16), radius=1.5, speed=2.0)]
    env = open_env(seed=23, dynamics=dyn)
    p = build(EbgrrtPlanner, seed=24)
    p.initial_plan(env, Point2(2, 30), Point2(30, 2))
    for _ in range(400):
        status = p.tick(env, 0.05)
        assert len(p.forest.labels()) <= 2
        if status.reached_goal:
            break


def test_drrt_single_label_after_any_tick():
    dyn = [DynamicObstacle(Point2(16, 16), radius=1.5, speed=2.0)]
    env = open_env(seed=25, dynamics=dyn)
    p = build(DrrtPlanner, seed=26)
    p.initial_plan(env, Point2(2, 30), Point2(30, 2))
    for _ in range(400):
        status = p.tick(env, 0.05)
        assert len(p.forest.labels()) == 1 or not status.replan_succeeded
        if status.reached_goal:
            break
