"""Planar and spatial primitives: angles, poses, convex hull, minimum-area rectangle.

Lengths are millimetres and angles radians throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import DegenerateInput

TWO_PI = 2.0 * math.pi


class Point2(NamedTuple):
    x: float
    y: float


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]; the half turn maps to +pi."""
    w = math.remainder(float(a), TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def cross2(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def signed_angle(reference, target) -> float:
    """Angle that rotates ``reference`` onto ``target``: atan2(cross, dot)."""
    rx, ry = float(reference[0]), float(reference[1])
    tx, ty = float(target[0]), float(target[1])
    if (rx == 0.0 and ry == 0.0) or (tx == 0.0 and ty == 0.0):
        raise DegenerateInput("signed_angle needs two non-zero vectors")
    return wrap_angle(math.atan2(rx * ty - ry * tx, rx * tx + ry * ty))


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise DegenerateInput("cannot normalise a zero vector")
    return v / n


def rot2(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


def perp_ccw(v) -> np.ndarray:
    """Rotate a planar vector by +90 degrees."""
    return np.array([-float(v[1]), float(v[0])])


@dataclass(frozen=True)
class Pose:
    """Position plus fixed-axis yaw/pitch/roll (R = Rz(yaw) Ry(pitch) Rx(roll))."""

    position: tuple[float, float, float]
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        if len(self.position) != 3:
            raise ValueError("Pose.position must have three components")
        for name in ("roll", "pitch", "yaw"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))

    @property
    def xyz(self) -> np.ndarray:
        return np.array(self.position)

    def matrix(self) -> np.ndarray:
        return Rotation.from_euler("ZYX", [self.yaw, self.pitch, self.roll]).as_matrix()

    def axis(self, i: int) -> np.ndarray:
        """World direction of body axis ``i`` (0 = X, 1 = Y, 2 = Z)."""
        return self.matrix()[:, i]

    @classmethod
    def from_matrix(cls, position, matrix) -> "Pose":
        yaw, pitch, roll = Rotation.from_matrix(np.asarray(matrix)).as_euler("ZYX")
        return cls(tuple(position), roll=roll, pitch=pitch, yaw=yaw)

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.position, other.position, atol=atol)
            and np.allclose(self.matrix(), other.matrix(), atol=atol)
        )


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point2, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(Point2(float(x), float(y)) for x, y in self.vertices))
        if len(self.vertices) < 3:
            raise DegenerateInput("a polygon needs at least three vertices")

    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @property
    def area(self) -> float:
        """Signed shoelace area (positive when counter-clockwise)."""
        p = self.array()
        q = np.roll(p, -1, axis=0)
        return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]))

    def contains(self, point, tol: float = 1e-9) -> bool:
        """Inside-or-on test for a counter-clockwise convex polygon."""
        p = self.array()
        q = np.roll(p, -1, axis=0)
        e = q - p
        r = np.asarray(point, dtype=float) - p
        c = e[:, 0] * r[:, 1] - e[:, 1] * r[:, 0]
        lengths = np.hypot(e[:, 0], e[:, 1])
        return bool(np.all(c >= -tol * lengths))


def convex_hull(points: Sequence) -> Polygon:
    """Andrew's monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) < 3:
        raise DegenerateInput("fewer than three distinct points")

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and cross2(
                (chain[-1][0] - chain[-2][0], chain[-1][1] - chain[-2][1]),
                (p[0] - chain[-2][0], p[1] - chain[-2][1]),
            ) <= 0.0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("all points are collinear")
    return Polygon(tuple(hull))


@dataclass(frozen=True)
class Rect:
    center: Point2
    half_extents: tuple[float, float]
    angle: float  # direction of the first half-extent, in [0, pi/2)

    @property
    def area(self) -> float:
        return 4.0 * self.half_extents[0] * self.half_extents[1]

    def corners(self) -> np.ndarray:
        """Counter-clockwise corners starting at (-u, -v)."""
        r = rot2(self.angle)
        hx, hy = self.half_extents
        local = np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])
        return local @ r.T + np.asarray(self.center)

    def __iter__(self):
        # allows ``center, half, angle = min_area_rect(poly)``
        return iter((self.center, self.half_extents, self.angle))


def min_area_rect(poly: Polygon) -> Rect:
    """Rotating-calipers minimum-area enclosing rectangle of a convex polygon."""
    p = poly.array()
    if abs(poly.area) <= 1e-12:
        raise DegenerateInput("zero-area polygon")
    edges = np.roll(p, -1, axis=0) - p
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    keep = lengths > 0
    u = edges[keep] / lengths[keep, None]
    v = np.stack([-u[:, 1], u[:, 0]], axis=1)
    pu = p @ u.T  # (n_vertices, n_edges)
    pv = p @ v.T
    lo_u, hi_u = pu.min(axis=0), pu.max(axis=0)
    lo_v, hi_v = pv.min(axis=0), pv.max(axis=0)
    areas = (hi_u - lo_u) * (hi_v - lo_v)
    best = int(np.argmin(areas))
    cu = 0.5 * (lo_u[best] + hi_u[best])
    cv = 0.5 * (lo_v[best] + hi_v[best])
    center = cu * u[best] + cv * v[best]
    hx = 0.5 * (hi_u[best] - lo_u[best])
    hy = 0.5 * (hi_v[best] - lo_v[best])
    angle = math.atan2(u[best, 1], u[best, 0]) % (0.5 * math.pi)
    # the angle reduction turns u by a multiple of 90 degrees; odd multiples swap extents
    quarter_turns = round((math.atan2(u[best, 1], u[best, 0]) - angle) / (0.5 * math.pi))
    if quarter_turns % 2:
        hx, hy = hy, hx
    if angle >= 0.5 * math.pi - 1e-15:
        angle, hx, hy = 0.0, hy, hx
    return Rect(Point2(float(center[0]), float(center[1])), (float(hx), float(hy)), float(angle))
