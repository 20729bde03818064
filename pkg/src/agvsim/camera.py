"""Linear ground-to-image camera model, its least-squares calibration,
fixed-height back-projection and line pose extraction.

Ground frame: vehicle centroid, x forward, y left, z up (meters).
Image frame: pixel column ``xpi`` and row ``ypi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (CoincidentPoints, ConfigError, DegenerateCalibration,
                     InsufficientPoints, SingularViewGeometry)
from .geom2d import (Transform2, compose, make_rotation, make_scaling,
                     make_shear_x, make_translation)

SINGULARITY_RTOL = 1e-12
COINCIDENT_TOL = 1e-6


class GroundPoint(NamedTuple):
    xg: float
    yg: float
    zg: float = 0.0


class ImagePoint(NamedTuple):
    xpi: float
    ypi: float


@dataclass(frozen=True)
class CameraModel:
    """The eight coefficients of the affine camera model.

    ``xpi = a11*xg + a12*yg + a13*zg + a14`` and likewise for ``ypi`` with
    row two. ``zg_fixed`` is the ground height assumed by back-projection.
    """

    a11: float
    a12: float
    a13: float
    a14: float
    a21: float
    a22: float
    a23: float
    a24: float
    zg_fixed: float = 0.0

    @classmethod
    def from_rows(cls, row1, row2, zg_fixed: float = 0.0) -> CameraModel:
        return cls(*map(float, row1), *map(float, row2), zg_fixed=float(zg_fixed))

    @property
    def rows(self) -> np.ndarray:
        return np.array([[self.a11, self.a12, self.a13, self.a14],
                         [self.a21, self.a22, self.a23, self.a24]])

    @property
    def q(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    def is_singular(self) -> bool:
        scale = max(abs(self.a11), abs(self.a12), abs(self.a21), abs(self.a22))
        det = self.a11 * self.a22 - self.a12 * self.a21
        return abs(det) <= SINGULARITY_RTOL * scale * scale


def project(model: CameraModel, g) -> ImagePoint:
    xg, yg, zg = g
    return ImagePoint(model.a11 * xg + model.a12 * yg + model.a13 * zg + model.a14,
                      model.a21 * xg + model.a22 * yg + model.a23 * zg + model.a24)


def back_project(model: CameraModel, ip) -> GroundPoint:
    """Recover the ground point seen at image point ``ip`` at height ``zg_fixed``.

    Raises SingularViewGeometry when the planar part of the model cannot be
    inverted (|det Q| at or below 1e-12 times the largest |Q entry| squared).
    """
    if model.is_singular():
        raise SingularViewGeometry(
            "planar part of the camera model is singular; cannot back-project")
    xpi, ypi = ip
    zg = model.zg_fixed
    b1 = xpi - model.a14 - model.a13 * zg
    b2 = ypi - model.a24 - model.a23 * zg
    det = model.a11 * model.a22 - model.a12 * model.a21
    xg = (model.a22 * b1 - model.a12 * b2) / det
    yg = (model.a11 * b2 - model.a21 * b1) / det
    return GroundPoint(xg, yg, zg)


# -- calibration -------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationSet:
    ground: np.ndarray  # (n, 3)
    image: np.ndarray   # (n, 2)

    @classmethod
    def from_pairs(cls, pairs: Sequence) -> CalibrationSet:
        ground = np.array([tuple(g) for g, _ in pairs], dtype=float).reshape(-1, 3)
        image = np.array([tuple(i) for _, i in pairs], dtype=float).reshape(-1, 2)
        return cls(ground, image)

    def __len__(self) -> int:
        return len(self.ground)

    def design_matrix(self) -> np.ndarray:
        return np.column_stack([self.ground, np.ones(len(self.ground))])


@dataclass(frozen=True)
class CalibrationResult:
    model: CameraModel
    residuals: np.ndarray  # (n, 2) observed minus predicted, pixels

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(np.sum(self.residuals ** 2, axis=1))))


def _check_design(cset: CalibrationSet) -> np.ndarray:
    if len(cset) < 4:
        raise InsufficientPoints(
            f"calibration needs at least 4 correspondences, got {len(cset)}")
    c = cset.design_matrix()
    if not np.all(np.isfinite(c)) or not np.all(np.isfinite(cset.image)):
        raise ValueError("calibration data contains non-finite values")
    rank = int(np.linalg.matrix_rank(c))
    if rank < 4:
        raise DegenerateCalibration(rank)
    return c


def calibrate(cset: CalibrationSet, zg_fixed: float = 0.0) -> CameraModel:
    """Least-squares fit of both coefficient rows to the correspondences."""
    return calibrate_with_residuals(cset, zg_fixed).model


def calibrate_with_residuals(cset: CalibrationSet,
                             zg_fixed: float = 0.0) -> CalibrationResult:
    c = _check_design(cset)
    # QR/SVD based solve: same minimiser as the normal equations, better conditioned.
    coef, *_ = np.linalg.lstsq(c, cset.image, rcond=None)
    model = CameraModel.from_rows(coef[:, 0], coef[:, 1], zg_fixed)
    return CalibrationResult(model, cset.image - c @ coef)


def calibrate_normal_equations(cset: CalibrationSet,
                               zg_fixed: float = 0.0) -> CameraModel:
    """Literal ``(C^T C)^-1 C^T X`` solve, kept for conformance checks."""
    c = _check_design(cset)
    ctc_inv = np.linalg.inv(c.T @ c)
    row1 = ctc_inv @ c.T @ cset.image[:, 0]
    row2 = ctc_inv @ c.T @ cset.image[:, 1]
    return CameraModel.from_rows(row1, row2, zg_fixed)


def read_correspondences(path) -> CalibrationSet:
    """Parse a correspondence file: ``xg yg zg xpi ypi [weight]`` per line.

    Blank lines and lines starting with ``#`` are skipped. The optional weight
    column must equal 1.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read correspondence file ({exc.strerror})", path) from None
    ground, image = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (5, 6):
            raise ConfigError(f"expected 5 or 6 fields, got {len(fields)}", path, lineno)
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise ConfigError(f"non-numeric field in {line!r}", path, lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("non-finite value", path, lineno)
        if len(values) == 6 and values[5] != 1.0:
            raise ConfigError("weights other than 1 are not supported", path, lineno)
        ground.append(values[:3])
        image.append(values[3:5])
    return CalibrationSet(np.array(ground, dtype=float).reshape(-1, 3),
                          np.array(image, dtype=float).reshape(-1, 2))


# -- line pose ---------------------------------------------------------------

def line_pose_from_points(near, far) -> tuple[float, float]:
    """Angle and signed offset of the line through two ground points.

    The angle is the direction from ``near`` to ``far`` relative to the
    vehicle's forward axis. The offset is the perpendicular distance from the
    vehicle centroid (origin) to the line, positive when the line lies on the
    vehicle's left. Swapping the points turns the angle by pi and flips the
    sign of the offset.
    """
    x1, y1 = near[0], near[1]
    x2, y2 = far[0], far[1]
    dx, dy = x2 - x1, y2 - y1
    length = math.hypot(dx, dy)
    if length < COINCIDENT_TOL:
        raise CoincidentPoints(f"line points are {length:.3g} m apart")
    angle = math.atan2(dy, dx)
    # position of the line along its own left normal (-dy, dx)/length
    offset = (x2 * y1 - x1 * y2) / length
    return angle, offset


# -- reference rig -----------------------------------------------------------

def default_camera(zg_fixed: float = -0.3) -> CameraModel:
    """A forward-looking camera model built from elementary 2D transforms.

    640x480 sensor; ground 1 m ahead lands on row ~400 and 2 m ahead on row
    ~200; 200 px per meter laterally with a slight roll and shear so no
    coefficient is trivially zero.
    """
    ground_to_pixels = compose(
        make_translation(320.0, 600.0),
        compose(make_rotation(math.radians(1.5)),
                compose(make_shear_x(0.02),
                        compose(make_scaling(200.0, 200.0),
                                Transform2(0.0, -1.0, -1.0, 0.0)))))
    t = ground_to_pixels
    # height dependence: a point 1 m higher appears 40 px higher and 3 px right
    return CameraModel(t.m11, t.m12, 3.0, t.tx,
                       t.m21, t.m22, -40.0, t.ty, zg_fixed=zg_fixed)


def calibration_rig_points(heights=(-0.3, 0.0, 0.3)) -> np.ndarray:
    """Twelve ground points: three heights times four planar positions."""
    planar = [(1.0, 0.6), (1.0, -0.6), (2.0, 0.8), (2.0, -0.8)]
    return np.array([(x, y, z) for z in heights for x, y in planar], dtype=float)
