"""2D reactive motion-replanning toolkit.

A self-repairing anytime RRT planner that prunes only genuinely risky tree
nodes, keeps the resulting disjoint trees, and repairs them by sampling in
utility-ranked map cells; four baseline replanners behind the same
interface; a dynamic-obstacle simulator; and a Monte-Carlo benchmark
harness with deterministic seeding.
"""

from .baselines import (
    BaselineConfig,
    DrrtPlanner,
    EbgrrtPlanner,
    ErrtPlanner,
    MprrtPlanner,
    PLANNER_NAMES,
    make_planner,
)
from .bench import (
    CampaignConfig,
    ScenarioError,
    ScenarioSpec,
    TrialResult,
    load_campaign,
    load_scenario,
    run_campaign,
    run_trial,
)
from .environment import (
    DynamicEnvironment,
    DynamicObstacle,
    SamplingError,
    StaticObstacle,
)
from .forest import Node, SearchForest, steer
from .geometry import (
    Circle,
    Point2,
    Rect,
    Segment2,
    dist,
    point_in_circle,
    point_in_rect,
    segment_intersects_circle,
    segment_intersects_rect,
)
from .planner import (
    PlannerConfig,
    PlanningFailure,
    ReactivePlanner,
    RobotStatus,
    SmarrtPlanner,
)
from .utility_map import CellIndex, MultiResolutionMap

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig",
    "CampaignConfig",
    "CellIndex",
    "Circle",
    "DrrtPlanner",
    "DynamicEnvironment",
    "DynamicObstacle",
    "EbgrrtPlanner",
    "ErrtPlanner",
    "MprrtPlanner",
    "MultiResolutionMap",
    "Node",
    "PLANNER_NAMES",
    "PlannerConfig",
    "PlanningFailure",
    "Point2",
    "ReactivePlanner",
    "Rect",
    "RobotStatus",
    "SamplingError",
    "ScenarioError",
    "ScenarioSpec",
    "SearchForest",
    "Segment2",
    "SmarrtPlanner",
    "StaticObstacle",
    "TrialResult",
    "dist",
    "load_campaign",
    "load_scenario",
    "make_planner",
    "point_in_circle",
    "point_in_rect",
    "run_campaign",
    "run_trial",
    "segment_intersects_circle",
    "segment_intersects_rect",
    "steer",
]
