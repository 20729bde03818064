"""2D point and affine transform algebra.

Every transform is stored as a 2x2 linear part plus a translation, so the
translation, scaling, rotation and shear constructors all produce the same
type and compose uniformly. Angles are in radians, positive counter-clockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class Point2(NamedTuple):
    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class Transform2:
    """Affine map ``p -> M p + t`` with ``M = [[m11, m12], [m21, m22]]``."""

    m11: float = 1.0
    m12: float = 0.0
    m21: float = 0.0
    m22: float = 1.0
    tx: float = 0.0
    ty: float = 0.0

    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def inverse(self) -> Transform2:
        d = self.det()
        if d == 0.0:
            raise ZeroDivisionError("transform is not invertible")
        i11, i12 = self.m22 / d, -self.m12 / d
        i21, i22 = -self.m21 / d, self.m11 / d
        return Transform2(i11, i12, i21, i22,
                          -(i11 * self.tx + i12 * self.ty),
                          -(i21 * self.tx + i22 * self.ty))

    def __matmul__(self, other: Transform2) -> Transform2:
        return compose(self, other)

    def __call__(self, p) -> Point2:
        return apply(self, p)


IDENTITY = Transform2()


def make_translation(dx: float, dy: float) -> Transform2:
    return Transform2(tx=dx, ty=dy)


def make_scaling(sx: float, sy: float) -> Transform2:
    return Transform2(m11=sx, m22=sy)


def make_rotation(theta: float) -> Transform2:
    """Counter-clockwise rotation by ``theta`` radians about the origin."""
    c, s = math.cos(theta), math.sin(theta)
    return Transform2(c, -s, s, c)


def make_shear_x(a: float) -> Transform2:
    """``(x, y) -> (x + a*y, y)``."""
    return Transform2(m12=a)


def make_shear_y(b: float) -> Transform2:
    """``(x, y) -> (x, b*x + y)``."""
    return Transform2(m21=b)


def compose(outer: Transform2, inner: Transform2) -> Transform2:
    """Return the transform equivalent to applying ``inner`` then ``outer``."""
    return Transform2(
        outer.m11 * inner.m11 + outer.m12 * inner.m21,
        outer.m11 * inner.m12 + outer.m12 * inner.m22,
        outer.m21 * inner.m11 + outer.m22 * inner.m21,
        outer.m21 * inner.m12 + outer.m22 * inner.m22,
        outer.m11 * inner.tx + outer.m12 * inner.ty + outer.tx,
        outer.m21 * inner.tx + outer.m22 * inner.ty + outer.ty,
    )


def apply(t: Transform2, p) -> Point2:
    x, y = p
    return Point2(t.m11 * x + t.m12 * y + t.tx, t.m21 * x + t.m22 * y + t.ty)


def pose_transform(x: float, y: float, heading: float) -> Transform2:
    """Body-to-world transform of a planar pose."""
    return compose(make_translation(x, y), make_rotation(heading))


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    if w == -math.pi:
        w = math.pi
    return w
