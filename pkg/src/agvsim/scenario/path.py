"""Followed-line geometry built from straight, arc and polyline pieces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..geom2d import wrap_angle

CONTINUITY_TOL = 1e-9


class Projection(NamedTuple):
    s: float            # arc length of the foot point from the path start
    cross_track: float  # signed distance, + when the point is left of the path
    tangent: float      # path heading at the foot point, rad
    foot: tuple[float, float]

    @property
    def distance(self) -> float:
        return abs(self.cross_track)


@dataclass(frozen=True)
class _Straight:
    x0: float
    y0: float
    heading: float
    length: float
    s0: float

    @property
    def end(self) -> tuple[float, float, float]:
        return (self.x0 + self.length * math.cos(self.heading),
                self.y0 + self.length * math.sin(self.heading), self.heading)

    def project(self, px: float, py: float) -> Projection:
        ux, uy = math.cos(self.heading), math.sin(self.heading)
        dx, dy = px - self.x0, py - self.y0
        along = dx * ux + dy * uy
        side = -dx * uy + dy * ux
        t = min(max(along, 0.0), self.length)
        fx, fy = self.x0 + t * ux, self.y0 + t * uy
        dist = math.hypot(px - fx, py - fy)
        return Projection(self.s0 + t, math.copysign(dist, side), self.heading, (fx, fy))

    def intersect(self, qx, qy, dx, dy) -> list[tuple[float, float]]:
        ux, uy = math.cos(self.heading), math.sin(self.heading)
        denom = dx * uy - dy * ux
        if abs(denom) < 1e-15:
            return []
        # q + a*d = p0 + b*u, solve for b
        rx, ry = self.x0 - qx, self.y0 - qy
        b = (dy * rx - dx * ry) / denom
        if -1e-12 <= b <= self.length + 1e-12:
            return [(self.x0 + b * ux, self.y0 + b * uy)]
        return []

    def sample(self, step: float) -> np.ndarray:
        n = max(1, math.ceil(self.length / step))
        t = np.linspace(0.0, self.length, n + 1)
        return np.column_stack([self.x0 + t * math.cos(self.heading),
                                self.y0 + t * math.sin(self.heading)])


@dataclass(frozen=True)
class _Arc:
    cx: float
    cy: float
    radius: float
    start_angle: float  # polar angle of the start point about the center
    sweep: float        # signed, + = counter-clockwise (left turn)
    s0: float

    @property
    def turn(self) -> float:
        return 1.0 if self.sweep > 0 else -1.0

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def _point(self, rel: float) -> tuple[float, float, float]:
        a = self.start_angle + self.turn * rel
        return (self.cx + self.radius * math.cos(a), self.cy + self.radius * math.sin(a),
                wrap_angle(a + self.turn * math.pi / 2))

    @property
    def end(self) -> tuple[float, float, float]:
        return self._point(abs(self.sweep))

    def _rel(self, px, py) -> float:
        # angle travelled from the start to the polar angle of p, in [0, 2pi)
        beta = math.atan2(py - self.cy, px - self.cx)
        return (self.turn * (beta - self.start_angle)) % (2.0 * math.pi)

    def project(self, px: float, py: float) -> Projection:
        rel = self._rel(px, py)
        span = abs(self.sweep)
        if rel > span:
            # outside the swept sector: nearer endpoint
            candidates = [0.0, span]
        else:
            candidates = [rel]
        best = None
        for r in candidates:
            fx, fy, tangent = self._point(r)
            dist = math.hypot(px - fx, py - fy)
            side = -(px - fx) * math.sin(tangent) + (py - fy) * math.cos(tangent)
            if r == rel:
                side = self.turn * (self.radius - math.hypot(px - self.cx, py - self.cy))
            if best is None or dist < best[0]:
                best = (dist, r, side, tangent, (fx, fy))
        dist, r, side, tangent, foot = best
        return Projection(self.s0 + r * self.radius, math.copysign(dist, side), tangent, foot)

    def intersect(self, qx, qy, dx, dy) -> list[tuple[float, float]]:
        fx, fy = qx - self.cx, qy - self.cy
        a = dx * dx + dy * dy
        b = 2.0 * (fx * dx + fy * dy)
        c = fx * fx + fy * fy - self.radius ** 2
        disc = b * b - 4 * a * c
        if disc < 0:
            return []
        root = math.sqrt(disc)
        out = []
        for t in ((-b - root) / (2 * a), (-b + root) / (2 * a)):
            px, py = qx + t * dx, qy + t * dy
            rel = self._rel(px, py)
            if rel <= abs(self.sweep) + 1e-12 or rel >= 2 * math.pi - 1e-12:
                out.append((px, py))
        return out

    def sample(self, step: float) -> np.ndarray:
        n = max(1, math.ceil(self.length / step))
        rel = np.linspace(0.0, abs(self.sweep), n + 1)
        a = self.start_angle + self.turn * rel
        return np.column_stack([self.cx + self.radius * np.cos(a),
                                self.cy + self.radius * np.sin(a)])


class Path:
    """A continuous chain of pieces starting at a given pose.

    ``segments`` holds dicts (as read from scenario files):
    ``{"type": "straight", "length": L}``,
    ``{"type": "arc", "radius": R, "sweep": phi}`` (radians, + = left turn),
    ``{"type": "polyline", "points": [[x, y], ...]}`` (world frame; the first
    point must coincide with the current end of the path).
    """

    def __init__(self, start: tuple[float, float, float], segments: Sequence[dict]):
        self.start = tuple(float(v) for v in start)
        self.pieces: list = []
        x, y, h = self.start
        s = 0.0
        for i, seg in enumerate(segments):
            kind = seg.get("type")
            if kind == "straight":
                length = float(seg["length"])
                if not length > 0:
                    raise ValueError(f"segment {i}: straight length must be positive")
                pieces = [_Straight(x, y, h, length, s)]
            elif kind == "arc":
                radius, sweep = float(seg["radius"]), float(seg["sweep"])
                if not radius > 0 or sweep == 0:
                    raise ValueError(f"segment {i}: arc needs radius > 0 and non-zero sweep")
                turn = 1.0 if sweep > 0 else -1.0
                cx, cy = x - turn * radius * math.sin(h), y + turn * radius * math.cos(h)
                pieces = [_Arc(cx, cy, radius, math.atan2(y - cy, x - cx), sweep, s)]
            elif kind == "polyline":
                pts = [tuple(map(float, p)) for p in seg["points"]]
                if len(pts) < 2:
                    raise ValueError(f"segment {i}: polyline needs at least two points")
                if math.hypot(pts[0][0] - x, pts[0][1] - y) > CONTINUITY_TOL:
                    raise ValueError(f"segment {i}: polyline starts at {pts[0]}, "
                                     f"not at the path end ({x:.9g}, {y:.9g})")
                pieces = []
                for (ax, ay), (bx, by) in zip(pts, pts[1:]):
                    length = math.hypot(bx - ax, by - ay)
                    if length <= CONTINUITY_TOL:
                        raise ValueError(f"segment {i}: repeated polyline point")
                    pieces.append(_Straight(ax, ay, math.atan2(by - ay, bx - ax), length,
                                            s + sum(p.length for p in pieces)))
            else:
                raise ValueError(f"segment {i}: unknown type {kind!r}")
            self.pieces.extend(pieces)
            s = pieces[-1].s0 + pieces[-1].length
            x, y, h = pieces[-1].end
        if not self.pieces:
            raise ValueError("path has no segments")
        self.length = s

    @property
    def end(self) -> tuple[float, float, float]:
        return self.pieces[-1].end

    def project(self, px: float, py: float) -> Projection:
        best = None
        for piece in self.pieces:
            pr = piece.project(px, py)
            if best is None or pr.distance < best.distance:
                best = pr
        return best

    def heading_error(self, x: float, y: float, heading: float) -> float:
        return wrap_angle(heading - self.project(x, y).tangent)

    def intersect_line(self, qx: float, qy: float, dx: float, dy: float) -> list[tuple[float, float]]:
        """World points where the infinite line ``q + t*d`` meets the path."""
        out = []
        for piece in self.pieces:
            out.extend(piece.intersect(qx, qy, dx, dy))
        return out

    def sample(self, step: float = 0.05) -> np.ndarray:
        return np.vstack([p.sample(step) for p in self.pieces])
