import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agvsim.geom2d import (IDENTITY, Transform2, apply, compose, make_rotation, make_scaling,
                          make_shear_x, make_shear_y, make_translation, pose_transform,
                          wrap_angle)

angles = st.floats(-10.0, 10.0)
coords = st.floats(-1e3, 1e3)
factors = st.floats(-5.0, 5.0)


def as_matrix(t: Transform2) -> np.ndarray:
    return np.array([[t.m11, t.m12, t.tx], [t.m21, t.m22, t.ty], [0.0, 0.0, 1.0]])


def test_quarter_turn_maps_x_axis_to_y_axis():
    p = apply(make_rotation(math.pi / 2), (1.0, 0.0))
    assert p.x == pytest.approx(0.0, abs=1e-15)
    assert p.y == pytest.approx(1.0)


def test_translation_then_point():
    assert apply(make_translation(2.0, -1.0), (1.0, 1.0)) == (3.0, 0.0)


def test_compose_applies_inner_first():
    t = compose(make_translation(1.0, 0.0), make_scaling(2.0, 2.0))
    assert apply(t, (1.0, 1.0)) == (3.0, 2.0)
    u = compose(make_scaling(2.0, 2.0), make_translation(1.0, 0.0))
    assert apply(u, (1.0, 1.0)) == (4.0, 2.0)


def test_matmul_and_call_agree_with_compose():
    a, b = make_rotation(0.3), make_shear_y(0.7)
    assert (a @ b) == compose(a, b)
    assert (a @ b)((1.0, 2.0)) == apply(compose(a, b), (1.0, 2.0))


def test_shear_examples():
    assert apply(make_shear_x(0.5), (1.0, 2.0)) == (2.0, 2.0)
    assert apply(make_shear_y(0.5), (2.0, 1.0)) == (2.0, 2.0)


def test_singular_inverse_raises():
    with pytest.raises(ZeroDivisionError):
        make_scaling(0.0, 1.0).inverse()


def test_pose_transform_places_body_points_in_world():
    t = pose_transform(1.0, 2.0, math.pi / 2)
    p = apply(t, (1.0, 0.0))   # one metre ahead of a vehicle facing +y
    assert p.x == pytest.approx(1.0)
    assert p.y == pytest.approx(3.0)


@given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0), st.floats(0.1, 3.0), st.floats(0.1, 3.0),
       angles, st.floats(-2.0, 2.0), coords, coords)
def test_compose_matches_matrix_product(x, y, sx, sy, th, k, px, py):
    a = compose(make_translation(x, y), make_rotation(th))
    b = compose(make_scaling(sx, sy), make_shear_x(k))
    expected = as_matrix(a) @ as_matrix(b) @ np.array([px, py, 1.0])
    got = apply(compose(a, b), (px, py))
    assert np.allclose(got, expected[:2], rtol=1e-12, atol=1e-9)


@given(angles, coords, coords)
def test_rotation_preserves_norm(th, px, py):
    p = apply(make_rotation(th), (px, py))
    assert math.isclose(p.norm(), math.hypot(px, py), rel_tol=1e-12, abs_tol=1e-12)


@given(angles, angles)
def test_rotation_angles_add(a, b):
    lhs, rhs = compose(make_rotation(a), make_rotation(b)), make_rotation(a + b)
    assert np.allclose(as_matrix(lhs), as_matrix(rhs), atol=1e-12)


@given(factors)
def test_shear_has_unit_determinant(k):
    assert make_shear_x(k).det() == pytest.approx(1.0, abs=1e-12)
    assert make_shear_y(k).det() == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), angles, st.floats(0.2, 5), st.floats(0.2, 5),
       st.floats(-2, 2), coords, coords)
def test_inverse_round_trip(x, y, th, sx, sy, k, px, py):
    t = compose(make_translation(x, y),
                compose(make_rotation(th), compose(make_scaling(sx, sy), make_shear_x(k))))
    back = apply(t.inverse(), apply(t, (px, py)))
    assert np.allclose(back, (px, py), rtol=1e-9, atol=1e-9)
    assert np.allclose(as_matrix(compose(t, t.inverse())), as_matrix(IDENTITY), atol=1e-12)


@given(st.floats(-1e4, 1e4))
def test_wrap_angle_range_and_equivalence(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
    assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)


def test_wrap_angle_boundaries():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
