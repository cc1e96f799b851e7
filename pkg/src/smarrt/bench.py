"""Scenario loading, trial execution, Monte-Carlo campaigns, and metrics.

A scenario fixes the workspace, the start/goal pair, and the moving-obstacle
population; a campaign sweeps obstacle counts and speeds over generated
scenarios and repeats each with many seeds. Environments and planners are
seeded deterministically from (master_seed, trial seed), so obstacle motion
is identical across planners and reruns produce identical result rows up to
wall-clock timing columns.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, TextIO

from .baselines import PLANNER_NAMES, BaselineConfig, make_planner
from .environment import DynamicEnvironment, DynamicObstacle, StaticObstacle
from .geometry import Circle, Point2, Rect, Segment2, dist, segment_intersects_circle
from .planner import PlannerConfig, PlanningFailure

__all__ = [
    "ScenarioError",
    "ScenarioSpec",
    "TrialResult",
    "CampaignConfig",
    "CSV_HEADER",
    "derive_seed",
    "load_scenario",
    "run_trial",
    "generate_scenario",
    "run_campaign",
    "summarize_rows",
    "read_results_csv",
]

CSV_HEADER = (
    "scenario_id,planner,seed,n_obstacles,obstacle_speed,success,"
    "travel_time_s,n_replans,avg_replan_time_s,total_replan_time_s"
)

# Obstacles never spawn closer than this to the start or goal point
# (measured from the body surface); prevents unwinnable t=0 states.
SPAWN_CLEARANCE = 1.0


class ScenarioError(ValueError):
    """Invalid scenario or campaign input; message carries the field path."""


def derive_seed(*parts: Any) -> int:
    """Stable 64-bit seed from heterogeneous parts (hash-seed independent)."""
    text = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


# ----------------------------------------------------------------------
# Scenario specification
# ----------------------------------------------------------------------


@dataclass(slots=True)
class ScenarioSpec:
    bounds: Rect
    start: Point2
    goal: Point2
    obstacles: list[dict[str, Any]] = field(default_factory=list)
    statics: list[StaticObstacle] = field(default_factory=list)
    robot_speed: float = 4.0
    min_cell: float = 1.0
    dt: float = 0.05
    max_sim_time: float = 120.0
    master_seed: int = 0
    scenario_id: str = "scenario"

    @property
    def n_obstacles(self) -> int:
        return len(self.obstacles)

    @property
    def obstacle_speed(self) -> float:
        """Representative speed: the common value, else the mean, else 0."""
        if not self.obstacles:
            return 0.0
        speeds = [o["speed"] for o in self.obstacles]
        if all(s == speeds[0] for s in speeds):
            return float(speeds[0])
        return float(sum(speeds) / len(speeds))

    def build_environment(self, rng: random.Random) -> DynamicEnvironment:
        dynamics = [
            DynamicObstacle(
                position=Point2(*o["initial_position"]),
                radius=float(o["radius"]),
                speed=float(o["speed"]),
            )
            for o in self.obstacles
        ]
        return DynamicEnvironment(
            bounds=self.bounds, statics=list(self.statics), dynamics=dynamics, rng=rng
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.scenario_id,
            "bounds": {
                "min": [self.bounds.min.x, self.bounds.min.y],
                "max": [self.bounds.max.x, self.bounds.max.y],
            },
            "start": [self.start.x, self.start.y],
            "goal": [self.goal.x, self.goal.y],
            "robot_speed": self.robot_speed,
            "min_cell": self.min_cell,
            "dt": self.dt,
            "max_sim_time": self.max_sim_time,
            "master_seed": self.master_seed,
            "statics": [_static_to_dict(s) for s in self.statics],
            "obstacles": [
                {
                    "radius": o["radius"],
                    "speed": o["speed"],
                    "initial_position": list(o["initial_position"]),
                }
                for o in self.obstacles
            ],
        }


def _static_to_dict(s: StaticObstacle) -> dict[str, Any]:
    if isinstance(s.shape, Circle):
        return {
            "type": "circle",
            "center": [s.shape.center.x, s.shape.center.y],
            "radius": s.shape.radius,
        }
    return {
        "type": "rect",
        "min": [s.shape.min.x, s.shape.min.y],
        "max": [s.shape.max.x, s.shape.max.y],
    }


def _schema(name: str) -> dict[str, Any]:
    path = Path(__file__).parent / "schemas" / name
    return json.loads(path.read_text())


def _format_json_path(parts: tuple[Any, ...]) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _validate_with_schema(data: Any, schema_name: str) -> None:
    import jsonschema

    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ScenarioError(f"{_format_json_path(tuple(e.absolute_path))}: {e.message}")


def scenario_from_dict(data: dict[str, Any]) -> ScenarioSpec:
    """Parse and validate a scenario document (schema plus semantic checks)."""
    _validate_with_schema(data, "scenario.schema.json")
    bounds = Rect(Point2(*data["bounds"]["min"]), Point2(*data["bounds"]["max"]))
    if bounds.width <= 0 or bounds.height <= 0:
        raise ScenarioError("bounds: must have positive width and height")
    statics = []
    for i, s in enumerate(data.get("statics", [])):
        if s["type"] == "circle":
            statics.append(StaticObstacle(Circle(Point2(*s["center"]), s["radius"])))
        else:
            statics.append(StaticObstacle(Rect(Point2(*s["min"]), Point2(*s["max"]))))
    static_probe = DynamicEnvironment(bounds=bounds, statics=statics)
    obstacles = []
    for i, o in enumerate(data.get("obstacles", [])):
        pos = Point2(*o["initial_position"])
        if not (
            bounds.min.x <= pos.x <= bounds.max.x and bounds.min.y <= pos.y <= bounds.max.y
        ):
            raise ScenarioError(f"obstacles[{i}].initial_position: outside bounds")
        if static_probe.body_overlaps_static(pos, float(o["radius"])):
            raise ScenarioError(f"obstacles[{i}].initial_position: body overlaps a static obstacle")
        obstacles.append(
            {
                "radius": float(o["radius"]),
                "speed": float(o["speed"]),
                "initial_position": (pos.x, pos.y),
            }
        )
    spec = ScenarioSpec(
        bounds=bounds,
        start=Point2(*data["start"]),
        goal=Point2(*data["goal"]),
        obstacles=obstacles,
        statics=statics,
        robot_speed=float(data.get("robot_speed", 4.0)),
        min_cell=float(data.get("min_cell", 1.0)),
        dt=float(data.get("dt", 0.05)),
        max_sim_time=float(data.get("max_sim_time", 120.0)),
        master_seed=int(data.get("master_seed", 0)),
        scenario_id=str(data.get("id", "scenario")),
    )
    for name, p in (("start", spec.start), ("goal", spec.goal)):
        if not (bounds.min.x <= p.x <= bounds.max.x and bounds.min.y <= p.y <= bounds.max.y):
            raise ScenarioError(f"{name}: outside bounds")
        if static_probe.point_in_static(p):
            raise ScenarioError(f"{name}: inside a static obstacle")
    return spec


def load_scenario(path: str | Path) -> ScenarioSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"<root>: not valid JSON ({e})") from None
    if not isinstance(data, dict):
        raise ScenarioError("<root>: expected a JSON object")
    return scenario_from_dict(data)


# ----------------------------------------------------------------------
# Trial execution
# ----------------------------------------------------------------------


@dataclass(slots=True)
class TrialResult:
    scenario_id: str
    planner: str
    seed: int
    n_obstacles: int
    obstacle_speed: float
    success: bool
    travel_time: float
    n_replans: int
    avg_replan_time: float
    total_replan_time: float

    def csv_row(self) -> list[str]:
        return [
            self.scenario_id,
            self.planner,
            str(self.seed),
            str(self.n_obstacles),
            str(self.obstacle_speed),
            "1" if self.success else "0",
            f"{self.travel_time:.6f}",
            str(self.n_replans),
            f"{self.avg_replan_time:.9f}",
            f"{self.total_replan_time:.9f}",
        ]


def _swept_collision(env: DynamicEnvironment, prev: Point2, cur: Point2, dt: float) -> bool:
    """Conservative continuous check: the robot's tick segment against each
    obstacle body inflated by the distance the obstacle can cover in dt."""
    seg = Segment2(prev, cur)
    for obs in env.dynamics:
        inflated = Circle(obs.position, obs.radius + obs.speed * dt)
        if segment_intersects_circle(seg, inflated):
            return True
    return False


def run_trial(
    spec: ScenarioSpec,
    planner_name: str,
    seed: int,
    planner_config: PlannerConfig | None = None,
    baseline_config: BaselineConfig | None = None,
    trace: TextIO | None = None,
    trace_utilities: bool = False,
) -> TrialResult:
    """Run one seeded trial to goal, collision, or timeout."""
    if planner_name not in PLANNER_NAMES:
        raise ScenarioError(f"planner: unknown name {planner_name!r}")
    env_rng = random.Random(derive_seed(spec.master_seed, seed, "env"))
    planner_rng = random.Random(derive_seed(spec.master_seed, seed, "planner"))
    env = spec.build_environment(env_rng)
    cfg = planner_config or PlannerConfig(robot_speed=spec.robot_speed)
    planner = make_planner(
        planner_name, cfg, planner_rng, min_cell=spec.min_cell, baseline=baseline_config
    )

    def fail(travel: float) -> TrialResult:
        return TrialResult(
            scenario_id=spec.scenario_id,
            planner=planner_name,
            seed=seed,
            n_obstacles=spec.n_obstacles,
            obstacle_speed=spec.obstacle_speed,
            success=False,
            travel_time=travel,
            n_replans=planner.n_replans,
            avg_replan_time=(
                planner.total_replan_time / planner.n_replans if planner.n_replans else 0.0
            ),
            total_replan_time=planner.total_replan_time,
        )

    if env.robot_in_collision(spec.start):
        return fail(0.0)
    try:
        planner.initial_plan(env, spec.start, spec.goal)
    except PlanningFailure:
        return fail(spec.max_sim_time)

    def emit(t: float, status_event: str, replan_ms: float, extras: dict[str, Any]) -> None:
        if trace is None:
            return
        rec: dict[str, Any] = {
            "t": round(t, 9),
            "robot": [planner.robot_pos.x, planner.robot_pos.y],
            "obstacles": [[o.position.x, o.position.y, o.radius] for o in env.dynamics],
            "path": [[p.x, p.y] for p in planner.path_positions()],
            "event": status_event,
            "replan_ms": replan_ms,
        }
        rec.update(extras)
        trace.write(json.dumps(rec) + "\n")

    emit(0.0, "none", 0.0, {})
    n_ticks = max(1, int(round(spec.max_sim_time / spec.dt)))
    prev = spec.start
    t = 0.0
    success = False
    collided = False
    for k in range(n_ticks):
        status = planner.tick(env, spec.dt)
        t = (k + 1) * spec.dt
        cur = status.position
        if env.robot_in_collision(cur) or _swept_collision(env, prev, cur, spec.dt):
            collided = True
        event = "replan" if status.replanned_this_tick else ("reroute" if status.rerouted else "none")
        extras: dict[str, Any] = {}
        if status.replanned_this_tick:
            extras["pruned"] = status.pruned_count
            if status.sampling_cell is not None:
                extras["cell"] = list(status.sampling_cell)
            if trace_utilities and getattr(planner, "map", None) is not None:
                extras["utility"] = planner.map.utility_grids()  # type: ignore[union-attr]
        emit(t, event, status.replan_wall_time * 1000.0, extras)
        if collided:
            break
        if status.reached_goal:
            success = True
            break
        prev = cur
    if not (success or collided):
        t = spec.max_sim_time
    n = planner.n_replans
    return TrialResult(
        scenario_id=spec.scenario_id,
        planner=planner_name,
        seed=seed,
        n_obstacles=spec.n_obstacles,
        obstacle_speed=spec.obstacle_speed,
        success=success,
        travel_time=t,
        n_replans=n,
        avg_replan_time=planner.total_replan_time / n if n else 0.0,
        total_replan_time=planner.total_replan_time,
    )


# ----------------------------------------------------------------------
# Campaigns
# ----------------------------------------------------------------------


@dataclass(slots=True)
class CampaignConfig:
    bounds: Rect
    start: Point2
    goal: Point2
    obstacle_counts: list[int]
    obstacle_speeds: list[float]
    planners: list[str]
    scenarios_per_combination: int
    trials_per_scenario: int
    master_seed: int
    obstacle_radius: float = 1.0
    robot_speed: float = 4.0
    min_cell: float = 1.0
    dt: float = 0.05
    max_sim_time: float = 120.0
    statics: list[StaticObstacle] = field(default_factory=list)
    name: str = "campaign"


def campaign_from_dict(data: dict[str, Any]) -> CampaignConfig:
    _validate_with_schema(data, "campaign.schema.json")
    for i, p in enumerate(data["planners"]):
        if p not in PLANNER_NAMES:
            raise ScenarioError(f"planners[{i}]: unknown planner {p!r}")
    statics = []
    for s in data.get("statics", []):
        if s["type"] == "circle":
            statics.append(StaticObstacle(Circle(Point2(*s["center"]), s["radius"])))
        else:
            statics.append(StaticObstacle(Rect(Point2(*s["min"]), Point2(*s["max"]))))
    return CampaignConfig(
        bounds=Rect(Point2(*data["bounds"]["min"]), Point2(*data["bounds"]["max"])),
        start=Point2(*data["start"]),
        goal=Point2(*data["goal"]),
        obstacle_counts=[int(c) for c in data["obstacle_counts"]],
        obstacle_speeds=[float(s) for s in data["obstacle_speeds"]],
        planners=list(data["planners"]),
        scenarios_per_combination=int(data["scenarios_per_combination"]),
        trials_per_scenario=int(data["trials_per_scenario"]),
        master_seed=int(data["master_seed"]),
        obstacle_radius=float(data.get("obstacle_radius", 1.0)),
        robot_speed=float(data.get("robot_speed", 4.0)),
        min_cell=float(data.get("min_cell", 1.0)),
        dt=float(data.get("dt", 0.05)),
        max_sim_time=float(data.get("max_sim_time", 120.0)),
        statics=statics,
        name=str(data.get("name", "campaign")),
    )


def load_campaign(path: str | Path) -> CampaignConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"<root>: not valid JSON ({e})") from None
    if not isinstance(data, dict):
        raise ScenarioError("<root>: expected a JSON object")
    return campaign_from_dict(data)


def generate_scenario(
    cc: CampaignConfig, n_obstacles: int, speed: float, scenario_index: int
) -> ScenarioSpec:
    """Fixed random obstacle placement for one (count, speed, index) cell."""
    seed = derive_seed(cc.master_seed, "scenario", n_obstacles, speed, scenario_index)
    rng = random.Random(seed)
    r = cc.obstacle_radius
    probe = DynamicEnvironment(bounds=cc.bounds, statics=list(cc.statics))
    obstacles: list[dict[str, Any]] = []
    guard = 0
    while len(obstacles) < n_obstacles:
        guard += 1
        if guard > 100_000:
            raise ScenarioError("obstacles: could not place obstacles (workspace too crowded)")
        x = rng.uniform(cc.bounds.min.x + r, cc.bounds.max.x - r)
        y = rng.uniform(cc.bounds.min.y + r, cc.bounds.max.y - r)
        p = Point2(x, y)
        if dist(p, cc.start) <= r + SPAWN_CLEARANCE or dist(p, cc.goal) <= r + SPAWN_CLEARANCE:
            continue
        if probe.body_overlaps_static(p, r):
            continue
        obstacles.append({"radius": r, "speed": speed, "initial_position": (x, y)})
    return ScenarioSpec(
        bounds=cc.bounds,
        start=cc.start,
        goal=cc.goal,
        obstacles=obstacles,
        statics=list(cc.statics),
        robot_speed=cc.robot_speed,
        min_cell=cc.min_cell,
        dt=cc.dt,
        max_sim_time=cc.max_sim_time,
        master_seed=seed,
        scenario_id=f"obs{n_obstacles}_spd{speed:g}_scn{scenario_index}",
    )


def _campaign_tasks(cc: CampaignConfig) -> list[tuple[ScenarioSpec, str, int]]:
    tasks = []
    for n_obs in cc.obstacle_counts:
        for speed in cc.obstacle_speeds:
            for s_idx in range(cc.scenarios_per_combination):
                spec = generate_scenario(cc, n_obs, speed, s_idx)
                for planner in cc.planners:
                    for seed in range(cc.trials_per_scenario):
                        tasks.append((spec, planner, seed))
    return tasks


def _run_task(payload: tuple[dict[str, Any], str, int]) -> TrialResult:
    spec_dict, planner, seed = payload
    return run_trial(scenario_from_dict(spec_dict), planner, seed)


def run_campaign(
    cc: CampaignConfig,
    out_csv: str | Path,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> list[TrialResult]:
    """Run the full factorial; append rows in deterministic order.

    Existing rows in out_csv are kept and their trials skipped, which makes
    interrupted campaigns resumable.
    """
    out_path = Path(out_csv)
    done: set[tuple[str, str, int]] = set()
    existing: list[list[str]] = []
    if out_path.exists():
        with out_path.open(newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is not None and ",".join(header) != CSV_HEADER:
                raise ScenarioError("out: existing CSV has a different header")
            for row in reader:
                existing.append(row)
                done.add((row[0], row[1], int(row[2])))
    tasks = [
        (spec, planner, seed)
        for (spec, planner, seed) in _campaign_tasks(cc)
        if (spec.scenario_id, planner, seed) not in done
    ]
    results: list[TrialResult] = []
    total = len(tasks)
    if jobs > 1 and total:
        payloads = [(spec.to_dict(), planner, seed) for spec, planner, seed in tasks]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, res in enumerate(pool.map(_run_task, payloads, chunksize=4)):
                results.append(res)
                if progress:
                    progress(i + 1, total)
    else:
        for i, (spec, planner, seed) in enumerate(tasks):
            results.append(run_trial(spec, planner, seed))
            if progress:
                progress(i + 1, total)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER.split(","))
        for row in existing:
            writer.writerow(row)
        for res in results:
            writer.writerow(res.csv_row())
    return results


# ----------------------------------------------------------------------
# Summaries
# ----------------------------------------------------------------------


def read_results_csv(path: str | Path) -> list[dict[str, Any]]:
    """Rows from a results CSV with numeric fields coerced."""
    out: list[dict[str, Any]] = []
    with Path(path).open(newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or ",".join(reader.fieldnames) != CSV_HEADER:
            raise ScenarioError("results CSV header does not match the expected schema")
        for row in reader:
            out.append(
                {
                    "scenario_id": row["scenario_id"],
                    "planner": row["planner"],
                    "seed": int(row["seed"]),
                    "n_obstacles": int(row["n_obstacles"]),
                    "obstacle_speed": float(row["obstacle_speed"]),
                    "success": row["success"] == "1",
                    "travel_time_s": float(row["travel_time_s"]),
                    "n_replans": int(row["n_replans"]),
                    "avg_replan_time_s": float(row["avg_replan_time_s"]),
                    "total_replan_time_s": float(row["total_replan_time_s"]),
                }
            )
    return out


def summarize_rows(rows: list[dict[str, Any]]) -> list[str]:
    """Per-(count, speed, planner) medians, one parseable line each."""
    groups: dict[tuple[int, float, str], list[dict[str, Any]]] = {}
    for row in rows:
        key = (row["n_obstacles"], row["obstacle_speed"], row["planner"])
        groups.setdefault(key, []).append(row)
    lines = []
    for (n_obs, speed, planner) in sorted(groups):
        g = groups[(n_obs, speed, planner)]
        successes = [r for r in g if r["success"]]
        success_rate = len(successes) / len(g)
        med_travel = statistics.median([r["travel_time_s"] for r in successes]) if successes else math.nan
        med_replan = statistics.median([r["avg_replan_time_s"] for r in g])
        lines.append(
            f"SUMMARY n_obstacles={n_obs} obstacle_speed={speed:g} planner={planner} "
            f"trials={len(g)} success_rate={success_rate:.4f} "
            f"median_travel_s={med_travel:.6f} median_avg_replan_s={med_replan:.9f}"
        )
    return lines
