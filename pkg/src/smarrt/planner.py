"""Reactive replanners: shared machinery and the self-repairing planner.

The headline planner keeps a goal-rooted search forest. Each tick it checks
only the path window just ahead of the robot against obstacle risk zones.
When that window is threatened it prunes risky nodes inside a feasibility
horizon (fracturing the forest instead of discarding branches), labels the
fragments, scores map cells by how well a repair sample there would shorten
the robot->goal route, and stitches fragments back together by sampling
inside the best cell. A global RRT fallback covers the rare case where no
promising cell exists.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

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
from .utility_map import CellIndex, MultiResolutionMap

__all__ = [
    "PlannerConfig",
    "RobotStatus",
    "PlanningFailure",
    "ReactivePlanner",
    "SmarrtPlanner",
]


class PlanningFailure(RuntimeError):
    """Raised when an iteration budget runs out before a plan is found."""


@dataclass(slots=True)
class PlannerConfig:
    """Shared planner parameters (meters, seconds, probabilities)."""

    steer_step: float = 2.0
    goal_tolerance: float = 0.5
    robot_speed: float = 4.0
    t_u_init: float = 0.05
    t_u_smoothing: float = 0.3
    r_h_min: float = 1.0
    r_h_max: float = 8.0
    repair_samples_per_cell: int = 10
    connect_radius: float = 4.0
    rewire_radius: float = 4.0
    goal_bias: float = 0.05
    # Plumbing budgets (not part of the replanning model).
    init_iteration_budget: int = 100_000
    fallback_budget: int = 2_000
    fallback_robot_bias: float = 0.2
    max_merge_rounds: int = 32

    def __post_init__(self) -> None:
        for name in (
            "steer_step",
            "goal_tolerance",
            "robot_speed",
            "t_u_init",
            "t_u_smoothing",
            "r_h_min",
            "r_h_max",
            "connect_radius",
            "rewire_radius",
        ):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.repair_samples_per_cell <= 0:
            raise ValueError("repair_samples_per_cell must be > 0")
        if self.r_h_min > self.r_h_max:
            raise ValueError("r_h_min must not exceed r_h_max")
        if not 0.0 < self.t_u_smoothing <= 1.0:
            raise ValueError("t_u_smoothing must lie in (0, 1]")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must lie in [0, 1]")


@dataclass(slots=True)
class RobotStatus:
    """Per-tick planner report consumed by the benchmark loop."""

    position: Point2
    reached_goal: bool = False
    replanned_this_tick: bool = False
    replan_wall_time: float = 0.0
    replan_succeeded: bool = True
    rerouted: bool = False
    pruned_count: int = 0
    sampling_cell: tuple[int, int] | None = None


@dataclass(slots=True)
class _PathState:
    """Waypoint chain (node ids, robot end first) plus follow progress."""

    ids: list[int] = field(default_factory=list)
    cursor: int = 0


class ReactivePlanner:
    """Base class: path following, horizon geometry, and risk-zone helpers.

    Subclasses own the replanning strategy; they share the movement model
    (constant speed along the waypoint chain) and the zone construction so
    planner comparisons isolate the replanning strategy alone.
    """

    name = "base"

    def __init__(self, config: PlannerConfig, rng: random.Random, min_cell: float = 1.0) -> None:
        self.cfg = config
        self.rng = rng
        self.min_cell = min_cell
        self.forest = SearchForest(grid_cell=config.steer_step)
        self.robot_pos: Point2 | None = None
        self.x_goal: Point2 | None = None
        self._path: _PathState | None = None
        self._reached = False
        # Raw running estimate of replanning wall time (reported, and used
        # for horizon geometry only through the clamp below, which keeps
        # trajectories independent of machine speed).
        self.t_u = config.t_u_init
        self.n_replans = 0
        self.total_replan_time = 0.0

    # ------------------------------------------------------------------
    # Shared geometry
    # ------------------------------------------------------------------

    def effective_t_u(self) -> float:
        """Replanning-time estimate clamped so the lookahead arc (and with it
        the feasibility horizon) stays within [r_h_min, r_h_max]."""
        lo = self.cfg.r_h_min / (2.0 * self.cfg.robot_speed)
        hi = self.cfg.r_h_max / (2.0 * self.cfg.robot_speed)
        return min(max(self.t_u, lo), hi)

    def zones(self, env: DynamicEnvironment) -> list[Circle]:
        return env.collision_zones(self.effective_t_u())

    def lookahead_arc(self) -> float:
        return 2.0 * self.effective_t_u() * self.cfg.robot_speed

    def segment_clear(self, env: DynamicEnvironment, seg: Segment2, zones: list[Circle]) -> bool:
        if not env.segment_free_static(seg):
            return False
        for z in zones:
            if segment_intersects_circle(seg, z):
                return False
        return True

    # ------------------------------------------------------------------
    # Path access and following
    # ------------------------------------------------------------------

    @property
    def has_path(self) -> bool:
        return self._path is not None and bool(self._path.ids)

    def path_positions(self) -> list[Point2]:
        """Remaining waypoints, robot side first (empty when no path)."""
        if not self.has_path:
            return []
        assert self._path is not None
        nodes = self.forest.nodes
        return [nodes[nid].position for nid in self._path.ids[self._path.cursor :]]

    def remaining_polyline(self) -> list[Point2]:
        assert self.robot_pos is not None
        return [self.robot_pos, *self.path_positions()]

    def remaining_path_length(self) -> float:
        pts = self.remaining_polyline()
        return sum(dist(a, b) for a, b in zip(pts, pts[1:]))

    def horizon_point(self) -> Point2:
        """Point at the lookahead arc length along the remaining path (the
        path end if it is shorter; the robot position with no path)."""
        assert self.robot_pos is not None
        budget = self.lookahead_arc()
        pts = self.remaining_polyline()
        cur = pts[0]
        for nxt in pts[1:]:
            d = dist(cur, nxt)
            if d >= budget:
                if d == 0.0:
                    cur = nxt
                    continue
                f = budget / d
                return Point2(cur.x + (nxt.x - cur.x) * f, cur.y + (nxt.y - cur.y) * f)
            budget -= d
            cur = nxt
        return cur

    def path_window_segments(self) -> list[Segment2]:
        """Sub-segments of the remaining path up to the lookahead arc."""
        budget = self.lookahead_arc()
        pts = self.remaining_polyline()
        out: list[Segment2] = []
        cur = pts[0]
        for nxt in pts[1:]:
            d = dist(cur, nxt)
            if d >= budget:
                if d > 0.0:
                    f = budget / d
                    end = Point2(cur.x + (nxt.x - cur.x) * f, cur.y + (nxt.y - cur.y) * f)
                    out.append(Segment2(cur, end))
                break
            if d > 0.0:
                out.append(Segment2(cur, nxt))
            budget -= d
            cur = nxt
        return out

    def advance_along_path(self, dt: float) -> bool:
        """Move robot_speed * dt along the path; True if a waypoint was hit."""
        assert self.robot_pos is not None
        if not self.has_path:
            return False
        assert self._path is not None
        budget = self.cfg.robot_speed * dt
        nodes = self.forest.nodes
        hit = False
        while budget > 1e-12 and self._path.cursor < len(self._path.ids):
            target = nodes[self._path.ids[self._path.cursor]].position
            d = dist(self.robot_pos, target)
            if d <= budget:
                self.robot_pos = target
                self._path.cursor += 1
                budget -= d
                hit = True
            else:
                f = budget / d
                self.robot_pos = Point2(
                    self.robot_pos.x + (target.x - self.robot_pos.x) * f,
                    self.robot_pos.y + (target.y - self.robot_pos.y) * f,
                )
                budget = 0.0
        return hit

    def set_path(self, ids: list[int]) -> None:
        self._path = _PathState(list(ids), 0)

    def clear_path(self) -> None:
        self._path = None

    def record_replan(self, wall: float) -> None:
        self.n_replans += 1
        self.total_replan_time += wall
        a = self.cfg.t_u_smoothing
        self.t_u = (1.0 - a) * self.t_u + a * wall

    # ------------------------------------------------------------------
    # Interface implemented by subclasses
    # ------------------------------------------------------------------

    def initial_plan(
        self, env: DynamicEnvironment, x_robot: Point2, x_goal: Point2
    ) -> list[Point2]:
        raise NotImplementedError

    def tick(self, env: DynamicEnvironment, dt: float) -> RobotStatus:
        raise NotImplementedError

    def _finish_tick(self) -> None:
        assert self.robot_pos is not None and self.x_goal is not None
        if dist(self.robot_pos, self.x_goal) <= self.cfg.goal_tolerance:
            self._reached = True

    @property
    def reached_goal(self) -> bool:
        return self._reached


class SmarrtPlanner(ReactivePlanner):
    """Self-repairing reactive planner over a goal-rooted forest."""

    name = "smarrt"

    def __init__(self, config: PlannerConfig, rng: random.Random, min_cell: float = 1.0) -> None:
        super().__init__(config, rng, min_cell)
        self.map: MultiResolutionMap | None = None
        self.goal_id: int | None = None
        self._last_cell: tuple[int, int] | None = None

    # ------------------------------------------------------------------
    # Initial plan
    # ------------------------------------------------------------------

    def initial_plan(
        self, env: DynamicEnvironment, x_robot: Point2, x_goal: Point2
    ) -> list[Point2]:
        """Grow a goal-rooted tree (statics only) until it reaches the robot."""
        cfg = self.cfg
        self.robot_pos = x_robot
        self.x_goal = x_goal
        self.map = MultiResolutionMap(env.bounds, self.min_cell)
        self.forest = SearchForest(grid_cell=cfg.steer_step)
        self.goal_id = self.forest.insert(x_goal, None)
        self.map.index_node(self.goal_id, x_goal, self.forest.nodes[self.goal_id].tree_label)
        if dist(x_goal, x_robot) <= cfg.goal_tolerance:
            self.set_path([self.goal_id])
            return self.path_positions()
        forest = self.forest
        for _ in range(cfg.init_iteration_budget):
            if self.rng.random() < cfg.goal_bias:
                target = x_robot
            else:
                target = env.sample_free(self.rng)
            near_id = forest.nearest(target)
            origin = forest.nodes[near_id].position
            new_pt = steer(origin, target, cfg.steer_step)
            if new_pt == origin:
                continue
            if not env.segment_free_static(Segment2(origin, new_pt)):
                continue
            new_id = forest.insert(new_pt, near_id)
            self.map.index_node(new_id, new_pt, forest.nodes[new_id].tree_label)
            if dist(new_pt, x_robot) <= cfg.goal_tolerance:
                self.set_path(forest.path_to_root_ids(new_id))
                return self.path_positions()
        raise PlanningFailure(
            f"initial plan not found within {cfg.init_iteration_budget} extensions"
        )

    # ------------------------------------------------------------------
    # Feasibility checking and pruning
    # ------------------------------------------------------------------

    def check_feasibility(self, env: DynamicEnvironment) -> bool:
        """True iff no risk zone cuts the path within the lookahead window."""
        zones = self.zones(env)
        if not zones:
            return True
        for seg in self.path_window_segments():
            for z in zones:
                if segment_intersects_circle(seg, z):
                    return False
        return True

    def prune_risky(self, env: DynamicEnvironment) -> int:
        """Remove nodes inside the feasibility horizon AND any risk zone."""
        assert self.robot_pos is not None and self.map is not None
        cfg = self.cfg
        zones = self.zones(env)
        p_c = self.robot_pos
        r_h = min(max(dist(p_c, self.horizon_point()), cfg.r_h_min), cfg.r_h_max)
        victims = []
        nodes = self.forest.nodes
        for nid in self.forest.near(p_c, r_h):
            pos = nodes[nid].position
            for z in zones:
                if point_in_circle(pos, z):
                    victims.append(nid)
                    break
        if not victims:
            return 0
        for nid in victims:
            self.map.remove_node(nid, nodes[nid].position)
        path_ids = set(self._path.ids) if self._path else set()
        self.forest.prune(victims)
        self.forest.floodfill_relabel()
        self._refresh_map_labels()
        if path_ids.intersection(victims):
            self.clear_path()
        return len(victims)

    def _refresh_map_labels(self) -> None:
        assert self.map is not None
        index = self.map.index_node
        for nid, node in self.forest.nodes.items():
            index(nid, node.position, node.tree_label)

    # ------------------------------------------------------------------
    # Repair
    # ------------------------------------------------------------------

    def repair(self, env: DynamicEnvironment) -> list[Point2] | None:
        """Re-establish a horizon-feasible path from robot to goal root.

        Merges fragments by sampling inside utility-ranked cells; escalates
        to the next-best cell after repeated failures and finally to global
        goal-component growth. None when the growth budget runs out.
        """
        assert self.robot_pos is not None and self.x_goal is not None and self.map is not None
        cfg = self.cfg
        zones = self.zones(env)
        self._last_cell = None
        if self.goal_id not in self.forest:
            self.goal_id = self.forest.insert(self.x_goal, None)
            self.map.index_node(
                self.goal_id, self.x_goal, self.forest.nodes[self.goal_id].tree_label
            )
        if any(point_in_circle(self.robot_pos, z) for z in zones):
            # Every segment leaving the robot crosses that zone, so no path
            # can be adopted this tick; hold and wait for the zone to move.
            return None
        path = self._try_restore_path(env, zones)
        if path is not None:
            return path
        cell_failures = 0
        masked: set[tuple[int, int]] = set()
        for _ in range(cfg.max_merge_rounds):
            if cell_failures >= 5:
                break
            self.map.mark_validity()
            self.map.compute_utilities(self.robot_pos, self.x_goal)
            robot_cell = self.map.cell_of(self.robot_pos)
            merged = False
            while cell_failures < 5:
                cell = self.map.search_sampling_cell(robot_cell, masked)
                if cell is None:
                    break
                if self._sample_and_merge_in_cell(env, cell, zones):
                    self._last_cell = (cell.ix, cell.iy)
                    merged = True
                    break
                masked.add((cell.ix, cell.iy))
                cell_failures += 1
            if not merged:
                break
            path = self._try_restore_path(env, zones)
            if path is not None:
                return path
        return self._global_fallback(env, zones)

    def _sample_and_merge_in_cell(
        self, env: DynamicEnvironment, cell: CellIndex, zones: list[Circle]
    ) -> bool:
        """Draw samples inside the cell; join every fragment reachable from
        one sample. True when at least two fragments merged."""
        assert self.map is not None
        cfg = self.cfg
        rect = self.map.cell_rect(cell)
        nodes = self.forest.nodes
        for _ in range(cfg.repair_samples_per_cell):
            s = Point2(
                self.rng.uniform(rect.min.x, rect.max.x),
                self.rng.uniform(rect.min.y, rect.max.y),
            )
            if env.point_in_static(s):
                continue
            best_by_label: dict[int, tuple[float, int]] = {}
            for nid in self.forest.near(s, cfg.connect_radius):
                node = nodes[nid]
                cand = (dist(s, node.position), nid)
                prev = best_by_label.get(node.tree_label)
                if prev is None or cand < prev:
                    best_by_label[node.tree_label] = cand
            connectable: dict[int, int] = {}
            for label, (_, nid) in sorted(best_by_label.items()):
                seg = Segment2(s, nodes[nid].position)
                if self.segment_clear(env, seg, zones):
                    connectable[label] = nid
            if len(connectable) < 2:
                continue
            self._join_fragments(s, connectable)
            return True
        return False

    def _join_fragments(self, s: Point2, connectable: dict[int, int]) -> None:
        """Insert s under the anchor fragment and re-hang the others on it."""
        assert self.map is not None and self.goal_id is not None
        goal_label = self.forest.nodes[self.goal_id].tree_label
        anchor = goal_label if goal_label in connectable else min(connectable)
        new_id = self.forest.insert(s, connectable[anchor])
        self.map.index_node(new_id, s, self.forest.nodes[new_id].tree_label)
        nodes = self.forest.nodes
        for label, nid in sorted(connectable.items()):
            if label == anchor:
                continue
            self.forest.reroot(nid)
            for moved in self.forest.reparent(nid, new_id):
                self.map.index_node(moved, nodes[moved].position, nodes[moved].tree_label)

    def _try_restore_path(
        self, env: DynamicEnvironment, zones: list[Circle]
    ) -> list[Point2] | None:
        """Adopt the nearest goal-component node whose approach segment is
        clear and whose path is feasible within the lookahead window."""
        assert self.robot_pos is not None and self.goal_id is not None
        cfg = self.cfg
        if self.goal_id not in self.forest:
            return None
        goal_label = self.forest.nodes[self.goal_id].tree_label
        nodes = self.forest.nodes
        candidates = [
            (dist(self.robot_pos, nodes[nid].position), nid)
            for nid in self.forest.near(self.robot_pos, cfg.connect_radius)
            if nodes[nid].tree_label == goal_label
        ]
        candidates.sort()
        for _, nid in candidates:
            seg = Segment2(self.robot_pos, nodes[nid].position)
            if not self.segment_clear(env, seg, zones):
                continue
            ids = self.forest.path_to_root_ids(nid)
            if self._window_feasible([self.robot_pos] + [nodes[i].position for i in ids], zones):
                self.set_path(ids)
                return self.path_positions()
        return None

    def _window_feasible(self, pts: list[Point2], zones: list[Circle]) -> bool:
        budget = self.lookahead_arc()
        cur = pts[0]
        for nxt in pts[1:]:
            d = dist(cur, nxt)
            end = nxt
            if d >= budget and d > 0.0:
                f = budget / d
                end = Point2(cur.x + (nxt.x - cur.x) * f, cur.y + (nxt.y - cur.y) * f)
            seg = Segment2(cur, end)
            for z in zones:
                if segment_intersects_circle(seg, z):
                    return False
            if d >= budget:
                return True
            budget -= d
            cur = nxt
        return True

    def _global_fallback(
        self, env: DynamicEnvironment, zones: list[Circle]
    ) -> list[Point2] | None:
        """Uniform RRT growth of the goal component, biased toward the robot,
        merging fragments opportunistically along the way."""
        assert self.robot_pos is not None and self.goal_id is not None and self.map is not None
        cfg = self.cfg
        forest = self.forest
        nodes = forest.nodes
        for it in range(cfg.fallback_budget):
            if it % 8 == 0:
                path = self._try_restore_path(env, zones)
                if path is not None:
                    return path
            goal_label = nodes[self.goal_id].tree_label
            if self.rng.random() < cfg.fallback_robot_bias:
                target = self.robot_pos
            else:
                target = env.sample_free(self.rng)
            try:
                near_id = forest.nearest(target, where=lambda n: nodes[n].tree_label == goal_label)
            except LookupError:
                return None
            origin = nodes[near_id].position
            new_pt = steer(origin, target, cfg.steer_step)
            if new_pt == origin:
                continue
            if not self.segment_clear(env, Segment2(origin, new_pt), zones):
                continue
            new_id = forest.insert(new_pt, near_id)
            self.map.index_node(new_id, new_pt, nodes[new_id].tree_label)
            self._opportunistic_merge(env, new_id, zones)
        return self._try_restore_path(env, zones)

    def _opportunistic_merge(
        self, env: DynamicEnvironment, new_id: int, zones: list[Circle]
    ) -> None:
        """Pull other fragments in when a grown node lands next to them."""
        nodes = self.forest.nodes
        new_node = nodes[new_id]
        best_by_label: dict[int, tuple[float, int]] = {}
        for nid in self.forest.near(new_node.position, self.cfg.steer_step):
            node = nodes[nid]
            if node.tree_label == new_node.tree_label:
                continue
            cand = (dist(new_node.position, node.position), nid)
            prev = best_by_label.get(node.tree_label)
            if prev is None or cand < prev:
                best_by_label[node.tree_label] = cand
        assert self.map is not None
        for label, (_, nid) in sorted(best_by_label.items()):
            if nodes[nid].tree_label == new_node.tree_label:
                continue  # merged via an earlier label this call
            seg = Segment2(new_node.position, nodes[nid].position)
            if not self.segment_clear(env, seg, zones):
                continue
            self.forest.reroot(nid)
            for moved in self.forest.reparent(nid, new_id):
                self.map.index_node(moved, nodes[moved].position, nodes[moved].tree_label)

    # ------------------------------------------------------------------
    # Local path improvement
    # ------------------------------------------------------------------

    def better_path_search(self, env: DynamicEnvironment) -> bool:
        """Switch to a nearby goal-connected node when the route through it
        is shorter than the current remaining path. True when switched."""
        assert self.robot_pos is not None
        if not self.has_path or self.goal_id not in self.forest:
            return False
        cfg = self.cfg
        zones = self.zones(env)
        nodes = self.forest.nodes
        goal_label = nodes[self.goal_id].tree_label
        best_len = self.remaining_path_length() - 1e-6
        best_id: int | None = None
        for nid in self.forest.near(self.robot_pos, cfg.rewire_radius):
            node = nodes[nid]
            if node.tree_label != goal_label:
                continue
            alt = dist(self.robot_pos, node.position) + self.forest.path_length_to_root(nid)
            if alt < best_len:
                best_len = alt
                best_id = nid
        if best_id is None:
            return False
        first = Segment2(self.robot_pos, nodes[best_id].position)
        if not self.segment_clear(env, first, zones):
            return False
        self.set_path(self.forest.path_to_root_ids(best_id))
        return True

    # ------------------------------------------------------------------
    # Tick
    # ------------------------------------------------------------------

    def tick(self, env: DynamicEnvironment, dt: float) -> RobotStatus:
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        assert self.robot_pos is not None, "initial_plan() must run before tick()"
        env.step(dt)
        if self._reached:
            return RobotStatus(position=self.robot_pos, reached_goal=True)
        status = RobotStatus(position=self.robot_pos)
        if self.has_path and self.check_feasibility(env):
            hit_waypoint = self.advance_along_path(dt)
            if hit_waypoint and self.has_path:
                status.rerouted = self.better_path_search(env)
        else:
            t0 = time.perf_counter()
            status.pruned_count = self.prune_risky(env)
            new_path = self.repair(env)
            wall = time.perf_counter() - t0
            self.record_replan(wall)
            status.replanned_this_tick = True
            status.replan_wall_time = wall
            status.sampling_cell = self._last_cell
            if new_path is not None:
                self.advance_along_path(dt)
            else:
                status.replan_succeeded = False
        status.position = self.robot_pos
        self._finish_tick()
        status.reached_goal = self._reached
        return status
