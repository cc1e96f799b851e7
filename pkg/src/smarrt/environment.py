"""Workspace, static obstacles, and randomly moving circular obstacles.

Obstacles move along a randomly drawn heading for a randomly drawn distance
(up to 10 m), redrawing the heading whenever the body touches the workspace
boundary or a static obstacle. Motion within one timestep is piecewise: the
step splits at every distance-exhaustion or contact event, so total distance
traveled always equals speed * elapsed time.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

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

__all__ = [
    "DynamicObstacle",
    "StaticObstacle",
    "DynamicEnvironment",
    "SamplingError",
    "MAX_WANDER_DISTANCE",
]

# Obstacles pick a fresh travel distance in (0, MAX_WANDER_DISTANCE] meters.
MAX_WANDER_DISTANCE = 10.0

_TWO_PI = 2.0 * math.pi
_ESCAPE_EPS = 1e-7


class SamplingError(RuntimeError):
    """Raised when rejection sampling cannot find a free point."""


@dataclass(slots=True)
class DynamicObstacle:
    """A circular obstacle moving at constant speed along random headings."""

    position: Point2
    radius: float
    speed: float
    heading: float = 0.0
    remaining_distance: float = 0.0
    # Total distance traveled, maintained by the stepper (diagnostics only).
    odometer: float = field(default=0.0, repr=False)

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"obstacle radius must be > 0, got {self.radius}")
        if self.speed < 0.0:
            raise ValueError(f"obstacle speed must be >= 0, got {self.speed}")
        if self.remaining_distance < 0.0:
            raise ValueError("remaining_distance must be >= 0")
        self.heading = self.heading % _TWO_PI

    def body(self) -> Circle:
        return Circle(self.position, self.radius)


@dataclass(frozen=True, slots=True)
class StaticObstacle:
    """An immovable obstacle; shape is a Circle or a Rect."""

    shape: Circle | Rect


@dataclass(slots=True)
class DynamicEnvironment:
    """Bounded 2D workspace with static and randomly moving obstacles.

    The rng state fully determines future obstacle motion; two environments
    built from the same seed and stepped identically stay bit-identical.
    """

    bounds: Rect
    statics: list[StaticObstacle] = field(default_factory=list)
    dynamics: list[DynamicObstacle] = field(default_factory=list)
    rng: random.Random = field(default_factory=random.Random)

    def __post_init__(self) -> None:
        for i, obs in enumerate(self.dynamics):
            if not point_in_rect(obs.position, self.bounds):
                raise ValueError(f"dynamic obstacle {i} position outside bounds")
            if 2.0 * obs.radius > min(self.bounds.width, self.bounds.height):
                raise ValueError(f"dynamic obstacle {i} does not fit in the workspace")
        for i, st in enumerate(self.statics):
            if not self._static_in_bounds(st.shape):
                raise ValueError(f"static obstacle {i} extends outside bounds")

    # ------------------------------------------------------------------
    # Obstacle motion
    # ------------------------------------------------------------------

    def step(self, dt: float) -> None:
        """Advance every dynamic obstacle by dt seconds (in list order)."""
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        for obs in self.dynamics:
            self._advance(obs, dt)

    def _advance(self, obs: DynamicObstacle, dt: float) -> None:
        if obs.speed <= 0.0:
            return
        lo_x = self.bounds.min.x + obs.radius
        hi_x = self.bounds.max.x - obs.radius
        lo_y = self.bounds.min.y + obs.radius
        hi_y = self.bounds.max.y - obs.radius
        # Clamp into the allowed center region; a body overhanging the
        # boundary at step start counts as touching it.
        x = min(max(obs.position.x, lo_x), hi_x)
        y = min(max(obs.position.y, lo_y), hi_y)
        t_left = dt
        guard = 0
        while t_left > 1e-12:
            guard += 1
            if guard > 1_000_000:
                break  # pathological heading chains; never seen in practice
            if obs.remaining_distance <= 1e-12:
                obs.heading = self.rng.random() * _TWO_PI
                obs.remaining_distance = MAX_WANDER_DISTANCE * (1.0 - self.rng.random())
            touching = (x <= lo_x, x >= hi_x, y <= lo_y, y >= hi_y)
            static_contact = bool(self.statics) and self._touches_static(x, y, obs.radius)
            if any(touching) or static_contact:
                obs.heading = self._redraw_inward(x, y, obs.radius, touching, static_contact)
            cx, cy = math.cos(obs.heading), math.sin(obs.heading)
            step_dist = min(obs.speed * t_left, obs.remaining_distance)
            contact_dist = self._distance_to_contact(x, y, cx, cy, lo_x, hi_x, lo_y, hi_y, obs.radius)
            move = min(step_dist, contact_dist)
            x = min(max(x + cx * move, lo_x), hi_x)
            y = min(max(y + cy * move, lo_y), hi_y)
            obs.remaining_distance -= move
            obs.odometer += move
            t_left -= move / obs.speed
        obs.position = Point2(x, y)

    def _redraw_inward(
        self,
        x: float,
        y: float,
        radius: float,
        touching: tuple[bool, bool, bool, bool],
        static_contact: bool,
    ) -> float:
        """Draw headings until one strictly separates from every contact."""
        at_lo_x, at_hi_x, at_lo_y, at_hi_y = touching
        h = 0.0
        for _ in range(10_000):
            h = self.rng.random() * _TWO_PI
            cx, cy = math.cos(h), math.sin(h)
            if at_lo_x and cx <= 0.0:
                continue
            if at_hi_x and cx >= 0.0:
                continue
            if at_lo_y and cy <= 0.0:
                continue
            if at_hi_y and cy >= 0.0:
                continue
            if static_contact and self._touches_static(
                x + cx * _ESCAPE_EPS, y + cy * _ESCAPE_EPS, radius
            ):
                continue
            return h
        return h  # wedged between contacts; accept the last draw

    def _distance_to_contact(
        self,
        x: float,
        y: float,
        cx: float,
        cy: float,
        lo_x: float,
        hi_x: float,
        lo_y: float,
        hi_y: float,
        radius: float,
    ) -> float:
        d = math.inf
        if cx > 0.0:
            d = min(d, (hi_x - x) / cx)
        elif cx < 0.0:
            d = min(d, (lo_x - x) / cx)
        if cy > 0.0:
            d = min(d, (hi_y - y) / cy)
        elif cy < 0.0:
            d = min(d, (lo_y - y) / cy)
        for st in self.statics:
            d = min(d, _swept_contact(x, y, cx, cy, radius, st.shape))
        return max(d, 0.0)

    def body_overlaps_static(self, p: Point2, radius: float) -> bool:
        """True iff a disk at p overlaps (or touches) any static obstacle."""
        return self._touches_static(p.x, p.y, radius)

    def _touches_static(self, x: float, y: float, radius: float) -> bool:
        p = Point2(x, y)
        for st in self.statics:
            shape = st.shape
            if isinstance(shape, Circle):
                if dist(p, shape.center) <= shape.radius + radius:
                    return True
            else:
                if (
                    shape.min.x - radius <= x <= shape.max.x + radius
                    and shape.min.y - radius <= y <= shape.max.y + radius
                ):
                    return True
        return False

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def collision_zones(self, t_u: float) -> list[Circle]:
        """One risk disk per moving obstacle: body radius plus 2 * t_u * speed.

        The body term keeps zones non-degenerate for slow and parked obstacles.
        """
        if t_u <= 0.0:
            raise ValueError(f"t_u must be > 0, got {t_u}")
        return [
            Circle(obs.position, obs.radius + 2.0 * t_u * obs.speed)
            for obs in self.dynamics
        ]

    def robot_in_collision(self, p: Point2) -> bool:
        """True iff p lies inside any obstacle body (robot is a mass point)."""
        for obs in self.dynamics:
            if point_in_circle(p, obs.body()):
                return True
        return self.point_in_static(p)

    def point_in_static(self, p: Point2) -> bool:
        for st in self.statics:
            shape = st.shape
            if isinstance(shape, Circle):
                if point_in_circle(p, shape):
                    return True
            elif point_in_rect(p, shape):
                return True
        return False

    def segment_free_static(self, s: Segment2) -> bool:
        """True iff s stays inside bounds and avoids every static obstacle."""
        if not (point_in_rect(s.a, self.bounds) and point_in_rect(s.b, self.bounds)):
            return False
        for st in self.statics:
            shape = st.shape
            if isinstance(shape, Circle):
                if segment_intersects_circle(s, shape):
                    return False
            elif segment_intersects_rect(s, shape):
                return False
        return True

    def sample_free(self, rng: random.Random, max_rejections: int = 10_000) -> Point2:
        """Uniform sample over bounds, rejected while inside a static obstacle."""
        for _ in range(max_rejections):
            p = Point2(
                rng.uniform(self.bounds.min.x, self.bounds.max.x),
                rng.uniform(self.bounds.min.y, self.bounds.max.y),
            )
            if not self.point_in_static(p):
                return p
        raise SamplingError(
            f"no free sample found after {max_rejections} rejections; "
            "the scenario's free space looks degenerate"
        )

    def _static_in_bounds(self, shape: Circle | Rect) -> bool:
        if isinstance(shape, Circle):
            return (
                self.bounds.min.x + shape.radius <= shape.center.x <= self.bounds.max.x - shape.radius
                and self.bounds.min.y + shape.radius <= shape.center.y <= self.bounds.max.y - shape.radius
            )
        return point_in_rect(shape.min, self.bounds) and point_in_rect(shape.max, self.bounds)


def _swept_contact(x: float, y: float, cx: float, cy: float, radius: float, shape: Circle | Rect) -> float:
    """Distance along unit heading (cx, cy) before a disk of the given radius
    enters contact with the shape; inf when it never does. A disk exactly on
    the contact boundary that is moving away does not count as entering."""
    if isinstance(shape, Circle):
        rx = shape.center.x - x
        ry = shape.center.y - y
        reach = shape.radius + radius
        b = rx * cx + ry * cy
        c0 = rx * rx + ry * ry - reach * reach
        disc = b * b - c0
        if disc < 0.0:
            return math.inf
        sq = math.sqrt(disc)
        t_lo, t_hi = b - sq, b + sq
    else:
        # Rect grown by the disk radius (sharp corners: conservative there).
        lo_x, hi_x = shape.min.x - radius, shape.max.x + radius
        lo_y, hi_y = shape.min.y - radius, shape.max.y + radius
        t_lo, t_hi = -math.inf, math.inf
        for p0, d, lo, hi in ((x, cx, lo_x, hi_x), (y, cy, lo_y, hi_y)):
            if d == 0.0:
                if p0 < lo or p0 > hi:
                    return math.inf
                continue
            t1 = (lo - p0) / d
            t2 = (hi - p0) / d
            if t1 > t2:
                t1, t2 = t2, t1
            t_lo = max(t_lo, t1)
            t_hi = min(t_hi, t2)
            if t_lo > t_hi:
                return math.inf
    if t_lo > 0.0:
        return t_lo  # enters contact later
    if t_hi > 0.0:
        return 0.0  # already overlapping and not leaving this instant
    return math.inf  # contact lies behind (or ends exactly now)
