"""Baseline reactive replanners sharing the planner interface.

Four strategies that differ in what they check (entire path vs entire tree),
what they discard on a threat, and how they bias regrowth:

- errt: discards the whole tree and regrows from the robot, biasing samples
  toward cached waypoints of the previous path and the goal.
- drrt: goal-rooted; prunes colliding nodes plus all their descendants, then
  regrows toward the robot.
- mprrt: robot-rooted; prunes only colliding nodes, keeps the fragments, and
  biases growth toward fragment roots to splice whole subtrees back in.
- ebgrrt: keeps the goal-connected suffix of the broken path as a remnant
  tree and regrows from the robot toward that remnant's frontier.

All four use the same steering, goal tolerance, risk zones, and rng
discipline as the self-repairing planner so comparisons isolate the
replanning strategy.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .environment import DynamicEnvironment
from .forest import SearchForest, steer
from .geometry import (
    Circle,
    Point2,
    Segment2,
    dist,
    point_in_circle,
    segment_intersects_circle,
)
from .planner import (
    PlannerConfig,
    PlanningFailure,
    ReactivePlanner,
    RobotStatus,
    SmarrtPlanner,
)

__all__ = [
    "BaselineConfig",
    "ErrtPlanner",
    "DrrtPlanner",
    "MprrtPlanner",
    "EbgrrtPlanner",
    "PLANNER_NAMES",
    "make_planner",
]


@dataclass(slots=True)
class BaselineConfig:
    """Sampling mix and budget knobs shared by the baseline planners.

    The per-replan budget bounds regrowth when a replan is geometrically
    hopeless-but-not-provably-so (zones are frozen within one episode, so
    iterating past a few thousand extensions on a 32 m workspace only adds
    wall time to doomed attempts; a held robot retries next tick anyway).
    """

    goal_bias: float = 0.1
    waypoint_bias: float = 0.5
    subtree_root_bias: float = 0.3
    iteration_budget: int = 4_000

    def __post_init__(self) -> None:
        for name in ("goal_bias", "waypoint_bias", "subtree_root_bias"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.goal_bias + self.waypoint_bias > 1.0:
            raise ValueError("goal_bias + waypoint_bias must not exceed 1")
        if self.iteration_budget <= 0:
            raise ValueError("iteration_budget must be > 0")


class _BaselinePlanner(ReactivePlanner):
    """Shared growth loop and bookkeeping for the four baselines."""

    def __init__(
        self,
        config: PlannerConfig,
        rng: random.Random,
        min_cell: float = 1.0,
        baseline: BaselineConfig | None = None,
    ) -> None:
        super().__init__(config, rng, min_cell)
        self.bl = baseline or BaselineConfig()
        # Waypoints of the most recent path, cached for biased sampling.
        self._waypoint_cache: list[Point2] = []

    # -- growth helpers -------------------------------------------------

    def _draw_target(self, env: DynamicEnvironment, focus: Point2 | None) -> Point2:
        """Sampling mix: previous-path waypoint / growth focus / uniform."""
        r = self.rng.random()
        if r < self.bl.waypoint_bias and self._waypoint_cache:
            return self._waypoint_cache[self.rng.randrange(len(self._waypoint_cache))]
        if r < self.bl.waypoint_bias + self.bl.goal_bias and focus is not None:
            return focus
        return env.sample_free(self.rng)

    def _extend(
        self,
        env: DynamicEnvironment,
        target: Point2,
        zones: list[Circle],
        label: int | None = None,
    ) -> int | None:
        """One RRT extension toward target; None when the edge is blocked."""
        nodes = self.forest.nodes
        if label is None:
            near_id = self.forest.nearest(target)
        else:
            try:
                near_id = self.forest.nearest(
                    target, where=lambda n: nodes[n].tree_label == label
                )
            except LookupError:
                return None
        origin = nodes[near_id].position
        new_pt = steer(origin, target, self.cfg.steer_step)
        if new_pt == origin:
            return None
        if not self.segment_clear(env, Segment2(origin, new_pt), zones):
            return None
        return self.forest.insert(new_pt, near_id)

    def _cache_waypoints(self) -> None:
        pts = self.path_positions()
        if pts:
            self._waypoint_cache = pts

    def _collect_colliding(self, zones: list[Circle]) -> list[int]:
        """Live nodes inside any risk zone (entire-tree check via the grid)."""
        hit: set[int] = set()
        for z in zones:
            hit.update(self.forest.near(z.center, z.radius))
        return sorted(hit)

    def _path_blocked(self, zones: list[Circle]) -> bool:
        """Entire remaining path vs zones (the path-checking planners)."""
        if not self.has_path:
            return True
        pts = self.remaining_polyline()
        for a, b in zip(pts, pts[1:]):
            seg = Segment2(a, b)
            for z in zones:
                if segment_intersects_circle(seg, z):
                    return True
        return False

    # -- provably futile replans ------------------------------------------

    def _point_sealed(self, p: Point2, zones: list[Circle]) -> bool:
        """Every edge leaving p crosses a zone (p lies inside one)."""
        return any(point_in_circle(p, z) for z in zones)

    def _disk_covered(self, p: Point2, tol: float, zones: list[Circle]) -> bool:
        """Some single zone contains the whole tolerance disk around p; no
        admissible node can ever land inside it (growth edges avoid zones)."""
        return any(dist(p, z.center) + tol <= z.radius for z in zones)

    # -- robot-rooted initial plan (errt / mprrt / ebgrrt) ---------------

    def _initial_plan_from_robot(
        self, env: DynamicEnvironment, x_robot: Point2, x_goal: Point2
    ) -> list[Point2]:
        cfg = self.cfg
        self.robot_pos = x_robot
        self.x_goal = x_goal
        self.forest = SearchForest(grid_cell=cfg.steer_step)
        root = self.forest.insert(x_robot, None)
        if dist(x_goal, x_robot) <= cfg.goal_tolerance:
            self.set_path([root])
            return self.path_positions()
        for _ in range(cfg.init_iteration_budget):
            if self.rng.random() < cfg.goal_bias:
                target = x_goal
            else:
                target = env.sample_free(self.rng)
            new_id = self._extend(env, target, zones=[])
            if new_id is None:
                continue
            if dist(self.forest.nodes[new_id].position, x_goal) <= cfg.goal_tolerance:
                ids = self.forest.path_to_root_ids(new_id)
                ids.reverse()
                self.set_path(ids)
                self._cache_waypoints()
                return self.path_positions()
        raise PlanningFailure(
            f"initial plan not found within {cfg.init_iteration_budget} extensions"
        )

    # -- tick skeleton ----------------------------------------------------

    def tick(self, env: DynamicEnvironment, dt: float) -> RobotStatus:
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        assert self.robot_pos is not None, "initial_plan() must run before tick()"
        env.step(dt)
        if self._reached:
            return RobotStatus(position=self.robot_pos, reached_goal=True)
        status = RobotStatus(position=self.robot_pos)
        zones = self.zones(env)
        if not self._needs_replan(env, zones):
            self.advance_along_path(dt)
        else:
            t0 = time.perf_counter()
            ok = self._replan(env, zones)
            wall = time.perf_counter() - t0
            self.record_replan(wall)
            status.replanned_this_tick = True
            status.replan_wall_time = wall
            status.replan_succeeded = ok
            if ok:
                self.advance_along_path(dt)
        status.position = self.robot_pos
        self._finish_tick()
        status.reached_goal = self._reached
        return status

    def _needs_replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        raise NotImplementedError

    def _replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        raise NotImplementedError


class ErrtPlanner(_BaselinePlanner):
    """Checks the entire path; on a threat discards the whole tree and
    regrows from the robot with waypoint/goal-biased sampling."""

    name = "errt"

    def initial_plan(self, env, x_robot, x_goal):
        return self._initial_plan_from_robot(env, x_robot, x_goal)

    def _needs_replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        return self._path_blocked(zones)

    def _replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        assert self.robot_pos is not None and self.x_goal is not None
        cfg = self.cfg
        if self._point_sealed(self.robot_pos, zones) or self._disk_covered(
            self.x_goal, cfg.goal_tolerance, zones
        ):
            return False  # hold; regrowth cannot succeed this tick
        self._cache_waypoints()
        self.clear_path()
        self.forest.prune(list(self.forest.nodes))
        root = self.forest.insert(self.robot_pos, None)
        if dist(self.robot_pos, self.x_goal) <= cfg.goal_tolerance:
            self.set_path([root])
            return True
        for _ in range(self.bl.iteration_budget):
            target = self._draw_target(env, self.x_goal)
            new_id = self._extend(env, target, zones)
            if new_id is None:
                continue
            if dist(self.forest.nodes[new_id].position, self.x_goal) <= cfg.goal_tolerance:
                ids = self.forest.path_to_root_ids(new_id)
                ids.reverse()
                self.set_path(ids)
                self._cache_waypoints()
                return True
        self.forest.prune(list(self.forest.nodes))
        return False


class DrrtPlanner(_BaselinePlanner):
    """Goal-rooted; checks the entire tree, prunes colliding nodes with all
    their descendants, and regrows toward the robot when the path breaks.

    The goal root itself is never pruned; while a zone covers the goal the
    replan attempt fails fast and is retried on later ticks.
    """

    name = "drrt"

    def __init__(self, config, rng, min_cell=1.0, baseline=None):
        super().__init__(config, rng, min_cell, baseline)
        self.goal_id: int | None = None

    def initial_plan(self, env, x_robot, x_goal):
        cfg = self.cfg
        self.robot_pos = x_robot
        self.x_goal = x_goal
        self.forest = SearchForest(grid_cell=cfg.steer_step)
        self.goal_id = self.forest.insert(x_goal, None)
        if dist(x_goal, x_robot) <= cfg.goal_tolerance:
            self.set_path([self.goal_id])
            return self.path_positions()
        for _ in range(cfg.init_iteration_budget):
            if self.rng.random() < cfg.goal_bias:
                target = x_robot
            else:
                target = env.sample_free(self.rng)
            new_id = self._extend(env, target, zones=[])
            if new_id is None:
                continue
            if dist(self.forest.nodes[new_id].position, x_robot) <= cfg.goal_tolerance:
                self.set_path(self.forest.path_to_root_ids(new_id))
                self._cache_waypoints()
                return self.path_positions()
        raise PlanningFailure(
            f"initial plan not found within {cfg.init_iteration_budget} extensions"
        )

    def _needs_replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        # Entire-tree maintenance; it only counts as a replanning event (and
        # is only timed) when it severs the robot's current path.
        colliding = [nid for nid in self._collect_colliding(zones) if nid != self.goal_id]
        if not colliding:
            return not self.has_path
        victims: set[int] = set()
        for nid in colliding:
            if nid in victims or nid not in self.forest:
                continue
            victims.update(self.forest.subtree_ids(nid))
        path_ids = set(self._path.ids) if self._path else set()
        self.forest.prune(victims)
        if path_ids & victims or not self.has_path:
            self.clear_path()
            return True
        return False

    def _replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        assert self.robot_pos is not None and self.x_goal is not None
        cfg = self.cfg
        for z in zones:
            if point_in_circle(self.x_goal, z):
                return False  # goal covered; hold and retry next tick
        if self._disk_covered(self.robot_pos, cfg.goal_tolerance, zones):
            return False  # no admissible node can reach the robot this tick
        for _ in range(self.bl.iteration_budget):
            target = self._draw_target(env, self.robot_pos)
            new_id = self._extend(env, target, zones)
            if new_id is None:
                continue
            if dist(self.forest.nodes[new_id].position, self.robot_pos) <= cfg.goal_tolerance:
                self.set_path(self.forest.path_to_root_ids(new_id))
                self._cache_waypoints()
                return True
        return False


class MprrtPlanner(_BaselinePlanner):
    """Robot-rooted; prunes only colliding nodes and re-splices the surviving
    fragments by biasing growth toward their roots."""

    name = "mprrt"

    def initial_plan(self, env, x_robot, x_goal):
        return self._initial_plan_from_robot(env, x_robot, x_goal)

    def _needs_replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        colliding = self._collect_colliding(zones)
        if not colliding:
            return not self.has_path
        path_ids = set(self._path.ids) if self._path else set()
        self.forest.prune(colliding)
        self.forest.floodfill_relabel()
        if path_ids.intersection(colliding) or not self.has_path:
            self.clear_path()
            return True
        return False

    def _replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        assert self.robot_pos is not None and self.x_goal is not None
        cfg = self.cfg
        bl = self.bl
        if self._point_sealed(self.robot_pos, zones) or self._disk_covered(
            self.x_goal, cfg.goal_tolerance, zones
        ):
            return False  # hold; regrowth cannot succeed this tick
        forest = self.forest
        root = forest.insert(self.robot_pos, None)
        main_label = forest.nodes[root].tree_label
        if dist(self.robot_pos, self.x_goal) <= cfg.goal_tolerance:
            self.set_path([root])
            return True
        nodes = forest.nodes
        fragment_roots = sorted(rid for rid in forest.roots if rid != root)
        found = False
        for _ in range(bl.iteration_budget):
            r = self.rng.random()
            if r < bl.subtree_root_bias and fragment_roots:
                target_id = fragment_roots[self.rng.randrange(len(fragment_roots))]
                target = nodes[target_id].position
            elif r < bl.subtree_root_bias + bl.goal_bias:
                target = self.x_goal
            else:
                target = env.sample_free(self.rng)
            new_id = self._extend(env, target, zones, label=main_label)
            if new_id is None:
                continue
            new_pos = nodes[new_id].position
            # Splice any fragment whose root is now within reach.
            spliced = [
                rid
                for rid in fragment_roots
                if dist(new_pos, nodes[rid].position) <= cfg.steer_step
                and self.segment_clear(env, Segment2(new_pos, nodes[rid].position), zones)
            ]
            for rid in spliced:
                forest.reparent(rid, new_id)
            if spliced:
                fragment_roots = [rid for rid in fragment_roots if rid not in spliced]
            goal_node = self._goal_touch(main_label)
            if goal_node is not None:
                ids = forest.path_to_root_ids(goal_node)
                ids.reverse()
                self.set_path(ids)
                self._cache_waypoints()
                found = True
                break
        # Episode cleanup, keeping the forest bounded by one episode of
        # growth: a successful episode keeps its main tree and drops the
        # fragments it chose not to splice (stale against moved zones); a
        # failed one drops its dead-end exploration and keeps the fragments
        # so the old corridor stays available for the next attempt.
        if found:
            keep = set(forest.subtree_ids(root))
            forest.prune([nid for nid in list(forest.nodes) if nid not in keep])
        else:
            forest.prune(forest.subtree_ids(root))
        return found

    def _goal_touch(self, main_label: int) -> int | None:
        assert self.x_goal is not None
        best: tuple[float, int] | None = None
        for nid in self.forest.near(self.x_goal, self.cfg.goal_tolerance):
            if self.forest.nodes[nid].tree_label != main_label:
                continue
            cand = (dist(self.x_goal, self.forest.nodes[nid].position), nid)
            if best is None or cand < best:
                best = cand
        return best[1] if best else None


class EbgrrtPlanner(_BaselinePlanner):
    """Checks the entire path; keeps the goal-connected suffix of a broken
    path as a remnant tree and regrows from the robot toward its frontier."""

    name = "ebgrrt"

    def __init__(self, config, rng, min_cell=1.0, baseline=None):
        super().__init__(config, rng, min_cell, baseline)
        # Remnant of the last broken path, kept across failed attempts.
        self._remnant_ids: list[int] = []

    def initial_plan(self, env, x_robot, x_goal):
        return self._initial_plan_from_robot(env, x_robot, x_goal)

    def _needs_replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        return self._path_blocked(zones)

    def _usable_suffix(self, ids: list[int], zones: list[Circle]) -> list[int]:
        """Longest goal-terminated run of ids whose waypoints and connecting
        segments avoid every zone."""
        nodes = self.forest.nodes
        live = [nid for nid in ids if nid in nodes]
        suffix: list[int] = []
        prev_pos: Point2 | None = None
        for nid in reversed(live):
            pos = nodes[nid].position
            if any(point_in_circle(pos, z) for z in zones):
                break
            if prev_pos is not None:
                seg = Segment2(pos, prev_pos)
                if any(segment_intersects_circle(seg, z) for z in zones):
                    break
            suffix.append(nid)
            prev_pos = pos
        suffix.reverse()
        return suffix

    def _replan(self, env: DynamicEnvironment, zones: list[Circle]) -> bool:
        assert self.robot_pos is not None and self.x_goal is not None
        cfg = self.cfg
        if self._point_sealed(self.robot_pos, zones) or self._disk_covered(
            self.x_goal, cfg.goal_tolerance, zones
        ):
            return False  # hold; regrowth cannot succeed this tick
        forest = self.forest
        self._cache_waypoints()
        old_ids = self._path.ids if self._path else self._remnant_ids
        remnant = self._usable_suffix(old_ids, zones)
        self.clear_path()
        keep = set(remnant)
        forest.prune([nid for nid in list(forest.nodes) if nid not in keep])
        frontier_id: int | None = None
        if remnant:
            # Orient the remnant chain toward its goal end so a later splice
            # yields one consistent parent chain.
            forest.reroot(remnant[-1])
            frontier_id = remnant[0]
        self._remnant_ids = remnant
        root = forest.insert(self.robot_pos, None)
        nodes = forest.nodes
        if dist(self.robot_pos, self.x_goal) <= cfg.goal_tolerance:
            self.set_path([root])
            return True
        frontier_pos = nodes[frontier_id].position if frontier_id is not None else None
        main_label = nodes[root].tree_label
        for _ in range(self.bl.iteration_budget):
            r = self.rng.random()
            if r < self.bl.waypoint_bias and frontier_pos is not None:
                target = frontier_pos
            elif r < self.bl.waypoint_bias + self.bl.goal_bias:
                target = self.x_goal
            else:
                target = env.sample_free(self.rng)
            new_id = self._extend(env, target, zones, label=main_label)
            if new_id is None:
                continue
            new_pos = nodes[new_id].position
            if frontier_pos is not None and frontier_id in nodes:
                if dist(new_pos, frontier_pos) <= cfg.connect_radius and self.segment_clear(
                    env, Segment2(new_pos, frontier_pos), zones
                ):
                    # Flip the fresh tree so parents point toward the goal,
                    # then hang it under the remnant frontier.
                    forest.reroot(new_id)
                    forest.reparent(new_id, frontier_id)
                    self.set_path(forest.path_to_root_ids(root))
                    self._cache_waypoints()
                    self._remnant_ids = []
                    return True
            if dist(new_pos, self.x_goal) <= cfg.goal_tolerance:
                ids = forest.path_to_root_ids(new_id)
                ids.reverse()
                self.set_path(ids)
                self._cache_waypoints()
                self._remnant_ids = []
                return True
        # Failed: drop the partial robot tree, keep only the remnant so the
        # forest stays single-labeled between attempts.
        if frontier_id is not None and frontier_id in nodes:
            keep = set(forest.subtree_ids(forest.root_of(frontier_id)))
            forest.prune([nid for nid in list(forest.nodes) if nid not in keep])
        else:
            forest.prune(list(forest.nodes))
        return False


PLANNER_NAMES = ("smarrt", "errt", "drrt", "mprrt", "ebgrrt")

_PLANNER_CLASSES: dict[str, type[ReactivePlanner]] = {
    "smarrt": SmarrtPlanner,
    "errt": ErrtPlanner,
    "drrt": DrrtPlanner,
    "mprrt": MprrtPlanner,
    "ebgrrt": EbgrrtPlanner,
}


def make_planner(
    name: str,
    config: PlannerConfig,
    rng: random.Random,
    min_cell: float = 1.0,
    baseline: BaselineConfig | None = None,
) -> ReactivePlanner:
    """Instantiate a planner by registry name."""
    try:
        cls = _PLANNER_CLASSES[name]
    except KeyError:
        known = ", ".join(PLANNER_NAMES)
        raise ValueError(f"unknown planner {name!r} (known: {known})") from None
    if cls is SmarrtPlanner:
        return SmarrtPlanner(config, rng, min_cell)
    return cls(config, rng, min_cell, baseline=baseline)  # type: ignore[call-arg]
