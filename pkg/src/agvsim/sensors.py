"""Emulated vision tracker and ultrasonic ring.

The tracker reports two windowed line points per sample, as image
coordinates. Here the line is an ideal curve: each window's centroid is where
the line crosses the ground preimage of that window's image row. Points are
rounded to whole pixels, then Gaussian pixel noise and random dropouts are
applied.

Sonar ranges are measured from the vehicle centroid along six fixed bearings;
each transducer reports the nearest obstacle point inside its cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .camera import (CameraModel, ImagePoint, back_project, default_camera,
                     line_pose_from_points, project)
from .errors import CoincidentPoints, SingularViewGeometry
from .geom2d import apply, make_rotation, pose_transform


@dataclass(frozen=True)
class VisionConfig:
    camera: CameraModel = field(default_factory=default_camera)
    window_near_row: int = 400
    window_far_row: int = 200
    sensor_width: int = 640
    sensor_height: int = 480
    pixel_noise_sigma: float = 0.0
    dropout_probability: float = 0.0
    rate: float = 10.0

    def __post_init__(self):
        if not 0 <= self.window_far_row < self.window_near_row < self.sensor_height:
            raise ValueError("window rows must satisfy 0 <= far < near < sensor_height")
        if self.pixel_noise_sigma < 0:
            raise ValueError("pixel_noise_sigma must be >= 0")
        if not 0 <= self.dropout_probability < 1:
            raise ValueError("dropout_probability must lie in [0, 1)")
        if not self.rate > 0:
            raise ValueError("vision rate must be positive")


class VisionSample(NamedTuple):
    valid: bool
    near: ImagePoint | None
    far: ImagePoint | None
    derived_angle: float
    derived_offset: float


_INVALID = VisionSample(False, None, None, math.nan, math.nan)


def _row_preimage(cam: CameraModel, row: float) -> tuple[float, float, float, float]:
    """Point and direction (vehicle frame) of the ground line imaged on ``row``."""
    c = row - cam.a24 - cam.a23 * cam.zg_fixed
    n2 = cam.a21 ** 2 + cam.a22 ** 2
    if n2 == 0.0:
        raise SingularViewGeometry("image rows do not depend on ground position")
    return cam.a21 * c / n2, cam.a22 * c / n2, -cam.a22, cam.a21


def window_point(cfg: VisionConfig, path, pose, row: int) -> ImagePoint | None:
    """Exact (unquantized) image point of the line on ``row``, or None."""
    cam = cfg.camera
    body_to_world = pose_transform(pose.x, pose.y, pose.heading)
    px, py, dx, dy = _row_preimage(cam, row)
    qx, qy = apply(body_to_world, (px, py))
    wdx, wdy = apply(make_rotation(pose.heading), (dx, dy))
    world_to_body = body_to_world.inverse()
    best = None
    for hit in path.intersect_line(qx, qy, wdx, wdy):
        bx, by = apply(world_to_body, hit)
        ip = project(cam, (bx, by, cam.zg_fixed))
        if not 0.0 <= ip.xpi < cfg.sensor_width:
            continue
        score = abs(ip.xpi - 0.5 * cfg.sensor_width)
        if best is None or score < best[0]:
            best = (score, ImagePoint(ip.xpi, float(row)))
    return None if best is None else best[1]


def vision_sample(cfg: VisionConfig, path, pose, rng: np.random.Generator,
                  quantize: bool = True) -> VisionSample:
    """One tracker reading of the followed line from ``pose``.

    Draws exactly one uniform and four normals from ``rng`` per call so the
    random stream stays aligned whatever the outcome.
    """
    u = rng.random()
    noise = rng.standard_normal(4) * cfg.pixel_noise_sigma
    if u < cfg.dropout_probability:
        return _INVALID
    pts = []
    for k, row in enumerate((cfg.window_near_row, cfg.window_far_row)):
        ip = window_point(cfg, path, pose, row)
        if ip is None:
            return _INVALID
        x, y = ip
        if quantize:
            x, y = math.floor(x + 0.5), math.floor(y + 0.5)
        x, y = x + noise[2 * k], y + noise[2 * k + 1]
        if not (0.0 <= x < cfg.sensor_width and 0.0 <= y < cfg.sensor_height):
            return _INVALID
        pts.append(ImagePoint(float(x), float(y)))
    try:
        near_g = back_project(cfg.camera, pts[0])
        far_g = back_project(cfg.camera, pts[1])
        angle, offset = line_pose_from_points(near_g, far_g)
    except (SingularViewGeometry, CoincidentPoints):
        return _INVALID
    return VisionSample(True, pts[0], pts[1], angle, offset)


# -- sonar -----------------------------------------------------------------------

DEFAULT_BEARINGS = tuple(math.radians(b) for b in (75.0, 45.0, 15.0, -15.0, -45.0, -75.0))


@dataclass(frozen=True)
class SonarConfig:
    bearings: tuple[float, ...] = DEFAULT_BEARINGS  # left to right
    cone_half_angle: float = math.radians(12.5)
    min_range: float = 0.15
    max_range: float = 10.0
    rate: float = 16.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if len(self.bearings) != 6:
            raise ValueError("sonar ring needs exactly six bearings")
        if not 0 <= self.min_range < self.max_range:
            raise ValueError("need 0 <= min_range < max_range")
        if not 0 < self.cone_half_angle <= math.pi / 2:
            raise ValueError("cone_half_angle must lie in (0, pi/2]")
        if self.noise_sigma < 0 or not self.rate > 0:
            raise ValueError("noise_sigma must be >= 0 and rate > 0")


class SonarReading(NamedTuple):
    distances: tuple[float, ...]
    zone_left: float
    zone_center: float
    zone_right: float

    @property
    def zones(self) -> tuple[float, float, float]:
        return self.zone_left, self.zone_center, self.zone_right


class Circle(NamedTuple):
    x: float
    y: float
    radius: float


def _ray_entry(ux: float, uy: float, cx: float, cy: float, r: float) -> float:
    """Distance along unit ray u from the origin to the disk, inf if missed."""
    along = ux * cx + uy * cy
    perp2 = cx * cx + cy * cy - along * along
    if perp2 > r * r:
        return math.inf
    half = math.sqrt(max(r * r - perp2, 0.0))
    near, far = along - half, along + half
    if far < 0:
        return math.inf
    return max(near, 0.0)


def cone_distance(bearing: float, half_angle: float, cx: float, cy: float, r: float) -> float:
    """Nearest distance from the origin to a disk, restricted to a cone.

    The disk is given in the sensor frame. Returns inf when the disk lies
    entirely outside the cone.
    """
    d = math.hypot(cx, cy)
    if d <= r:
        return 0.0
    rel = math.remainder(math.atan2(cy, cx) - bearing, 2 * math.pi)
    if abs(rel) <= half_angle:
        return d - r
    # the closest feasible point then lies on one of the cone's edge rays
    best = math.inf
    for edge in (bearing - half_angle, bearing + half_angle):
        best = min(best, _ray_entry(math.cos(edge), math.sin(edge), cx, cy, r))
    return best


def sonar_scan(cfg: SonarConfig, obstacles: Sequence, pose, rng: np.random.Generator) -> SonarReading:
    """Range every transducer against circular obstacles (world frame).

    Draws six normals from ``rng`` per call.
    """
    world_to_body = pose_transform(pose.x, pose.y, pose.heading).inverse()
    local = []
    for ob in obstacles:
        bx, by = apply(world_to_body, (ob[0], ob[1]))
        local.append((bx, by, ob[2]))
    noise = rng.standard_normal(6) * cfg.noise_sigma
    dists = []
    for k, bearing in enumerate(cfg.bearings):
        d = min((cone_distance(bearing, cfg.cone_half_angle, bx, by, r)
                 for bx, by, r in local), default=math.inf)
        d = min(max(d, cfg.min_range), cfg.max_range)
        if cfg.noise_sigma > 0:
            d = min(max(d + noise[k], cfg.min_range), cfg.max_range)
        dists.append(d)
    return SonarReading(tuple(dists), min(dists[0], dists[1]), min(dists[2], dists[3]),
                        min(dists[4], dists[5]))
