"""Exact 2D primitives: points, segments, circles, axis-aligned rectangles.

All predicates use closed-set semantics (boundary contact counts) and exact
float comparisons; callers that want margins inflate radii themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Point2",
    "Segment2",
    "Circle",
    "Rect",
    "dist",
    "point_segment_distance",
    "point_in_circle",
    "point_in_rect",
    "segment_intersects_circle",
    "segment_intersects_rect",
]


@dataclass(frozen=True, slots=True)
class Point2:
    """A point in the plane, in meters. Coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")


@dataclass(frozen=True, slots=True)
class Segment2:
    """Closed segment between two points; a == b is a valid point segment."""

    a: Point2
    b: Point2


@dataclass(frozen=True, slots=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius >= 0.0):
            raise ValueError(f"circle radius must be finite and >= 0, got {self.radius}")


@dataclass(frozen=True, slots=True)
class Rect:
    """Axis-aligned rectangle given by min and max corners."""

    min: Point2
    max: Point2

    def __post_init__(self) -> None:
        if self.min.x > self.max.x or self.min.y > self.max.y:
            raise ValueError(f"rect min corner must not exceed max corner: {self}")

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    @property
    def center(self) -> Point2:
        return Point2((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)


def dist(p: Point2, q: Point2) -> float:
    """Euclidean distance between two points."""
    return math.hypot(p.x - q.x, p.y - q.y)


def point_segment_distance(p: Point2, s: Segment2) -> float:
    """Minimum distance from p to the closed segment s."""
    ax, ay = s.a.x, s.a.y
    dx, dy = s.b.x - ax, s.b.y - ay
    len_sq = dx * dx + dy * dy
    if len_sq == 0.0:
        return math.hypot(p.x - ax, p.y - ay)
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / len_sq
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def point_in_circle(p: Point2, c: Circle) -> bool:
    """True iff p lies in the closed disk (boundary included)."""
    dx = p.x - c.center.x
    dy = p.y - c.center.y
    return dx * dx + dy * dy <= c.radius * c.radius


def point_in_rect(p: Point2, r: Rect) -> bool:
    """True iff p lies in the closed rectangle."""
    return r.min.x <= p.x <= r.max.x and r.min.y <= p.y <= r.max.y


def segment_intersects_circle(s: Segment2, c: Circle) -> bool:
    """True iff segment and closed disk share a point (tangency counts)."""
    return point_segment_distance(c.center, s) <= c.radius


def segment_intersects_rect(s: Segment2, r: Rect) -> bool:
    """True iff segment and closed rectangle share at least one point.

    Clips the segment parameter interval against both slabs (Liang-Barsky);
    the closed interval test makes edge and corner contact count.
    """
    x0, y0 = s.a.x, s.a.y
    dx, dy = s.b.x - x0, s.b.y - y0
    t_lo, t_hi = 0.0, 1.0
    for p0, d, lo, hi in ((x0, dx, r.min.x, r.max.x), (y0, dy, r.min.y, r.max.y)):
        if d == 0.0:
            if p0 < lo or p0 > hi:
                return False
            continue
        t1 = (lo - p0) / d
        t2 = (hi - p0) / d
        if t1 > t2:
            t1, t2 = t2, t1
        t_lo = max(t_lo, t1)
        t_hi = min(t_hi, t2)
        if t_lo > t_hi:
            return False
    return True
