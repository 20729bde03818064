import math
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agvsim.camera import (CalibrationSet, CameraModel, GroundPoint, back_project, calibrate,
                           calibrate_normal_equations, calibrate_with_residuals,
                           calibration_rig_points, default_camera, line_pose_from_points,
                           project, read_correspondences)
from agvsim.errors import (CoincidentPoints, ConfigError, DegenerateCalibration,
                           InsufficientPoints, SingularViewGeometry)

DATA = Path(__file__).parent / "data"
BUNDLED = resources.files("agvsim.data").joinpath("calibration_12pt.txt")

# ground truth used to generate the synthetic sets below
TRUTH = CameraModel(1.5, -210.0, 4.0, 318.0, -195.0, -3.0, -35.0, 590.0, zg_fixed=0.1)


def synthetic_set(model: CameraModel) -> CalibrationSet:
    g = calibration_rig_points()
    img = np.array([project(model, p) for p in g])
    return CalibrationSet(g, img)


def test_project_by_hand():
    m = CameraModel(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
    assert project(m, (1.0, 1.0, 1.0)) == (10.0, 26.0)
    assert project(m, (0.0, 0.0, 0.0)) == (4.0, 8.0)


def test_back_project_by_hand():
    # a pure scaling camera: xpi = 2 xg + 1, ypi = 4 yg - 2, no height term
    m = CameraModel(2.0, 0.0, 0.0, 1.0, 0.0, 4.0, 0.0, -2.0, zg_fixed=5.0)
    assert back_project(m, (5.0, 10.0)) == GroundPoint(2.0, 3.0, 5.0)


def test_calibration_recovers_generator():
    got = calibrate(synthetic_set(TRUTH), zg_fixed=TRUTH.zg_fixed)
    assert np.allclose(got.rows, TRUTH.rows, rtol=1e-9, atol=0)


def test_bundled_file_matches_documented_generator():
    cset = read_correspondences(BUNDLED)
    assert len(cset) == 12
    got = calibrate(cset).rows
    truth = default_camera().rows
    nz = truth != 0
    assert np.all(np.abs(got[nz] - truth[nz]) <= 1e-9 * np.abs(truth[nz]))


def test_lstsq_and_normal_equations_agree_on_noisy_data():
    rng = np.random.default_rng(7)
    cset = synthetic_set(TRUTH)
    noisy = CalibrationSet(cset.ground, cset.image + rng.normal(0, 0.5, cset.image.shape))
    a = calibrate(noisy).rows
    b = calibrate_normal_equations(noisy).rows
    assert np.allclose(a, b, rtol=1e-8, atol=1e-8)


def test_residuals_are_orthogonal_to_design():
    # least-squares optimality: C^T r = 0
    rng = np.random.default_rng(3)
    cset = synthetic_set(TRUTH)
    noisy = CalibrationSet(cset.ground, cset.image + rng.normal(0, 1.0, cset.image.shape))
    res = calibrate_with_residuals(noisy)
    assert np.allclose(noisy.design_matrix().T @ res.residuals, 0.0, atol=1e-8)
    assert res.rms > 0
    assert res.rms == pytest.approx(np.sqrt(np.mean(np.sum(res.residuals ** 2, axis=1))))


def test_noiseless_residuals_vanish():
    assert calibrate_with_residuals(synthetic_set(TRUTH)).rms < 1e-9


def test_too_few_points():
    with pytest.raises(InsufficientPoints):
        calibrate(read_correspondences(DATA / "three_points.txt"))


def test_coplanar_points_are_rank_deficient():
    with pytest.raises(DegenerateCalibration) as info:
        calibrate(read_correspondences(DATA / "coplanar_12pt.txt"))
    assert info.value.rank == 3


def test_reader_reports_line_numbers(tmp_path):
    with pytest.raises(ConfigError) as info:
        read_correspondences(DATA / "bad_field.txt")
    assert info.value.line == 3
    assert "bad_field.txt:3" in str(info.value)

    f = tmp_path / "w.txt"
    f.write_text("1 2 3 4 5 1\n1 2 3 4 5 0.5\n")
    with pytest.raises(ConfigError) as info:
        read_correspondences(f)
    assert info.value.line == 2

    f.write_text("1 2 3 4\n")
    with pytest.raises(ConfigError, match="5 or 6 fields"):
        read_correspondences(f)

    with pytest.raises(ConfigError, match="cannot read"):
        read_correspondences(tmp_path / "missing.txt")


def test_back_projection_round_trip():
    rng = np.random.default_rng(11)
    cam = default_camera()
    for xg, yg in rng.uniform([-3, -3], [3, 3], size=(100, 2)):
        g = back_project(cam, project(cam, (xg, yg, cam.zg_fixed)))
        assert math.hypot(g.xg - xg, g.yg - yg) < 1e-9
        assert g.zg == cam.zg_fixed


def test_singular_view_geometry():
    # planar rows proportional: every ground line maps onto one image line
    m = CameraModel(1.0, 2.0, 0.0, 0.0, 2.0, 4.0, 0.0, 0.0)
    assert m.is_singular()
    with pytest.raises(SingularViewGeometry):
        back_project(m, (1.0, 1.0))
    # scale-relative threshold: tiny but well-conditioned models stay invertible
    tiny = CameraModel(1e-8, 0.0, 0.0, 0.0, 0.0, 1e-8, 0.0, 0.0)
    assert not tiny.is_singular()


def test_default_camera_layout():
    cam = default_camera()
    near = project(cam, (1.0, 0.0, cam.zg_fixed))
    far = project(cam, (2.0, 0.0, cam.zg_fixed))
    assert 380 < near.ypi < 440 and 180 < far.ypi < 240
    assert abs(near.xpi - 320) < 5
    # a point to the left of the vehicle appears left in the image
    assert project(cam, (1.0, 0.5, cam.zg_fixed)).xpi < near.xpi


def left_normal_offset(p1, p2):
    # independent oracle: the line's position along its left unit normal
    d = np.subtract(p2, p1, dtype=float)
    n = np.array([-d[1], d[0]]) / np.linalg.norm(d)
    return float(np.dot(p1, n))


def test_line_pose_examples():
    assert line_pose_from_points((1, 1), (2, 1)) == pytest.approx((0.0, 1.0))
    assert line_pose_from_points((1, -1), (2, -1)) == pytest.approx((0.0, -1.0))
    angle, offset = line_pose_from_points((1, 0), (1, 1))
    assert angle == pytest.approx(math.pi / 2)
    assert offset == pytest.approx(-1.0)


def test_coincident_points():
    with pytest.raises(CoincidentPoints):
        line_pose_from_points((1.0, 0.0), (1.0 + 1e-7, 0.0))


pts = st.tuples(st.floats(-10, 10), st.floats(-10, 10))


@given(pts, pts)
def test_line_pose_matches_oracle(p1, p2):
    if math.dist(p1, p2) < 1e-3:
        return
    angle, offset = line_pose_from_points(p1, p2)
    assert angle == pytest.approx(math.atan2(p2[1] - p1[1], p2[0] - p1[0]))
    assert offset == pytest.approx(left_normal_offset(p1, p2), abs=1e-9)
    # reversing the points flips the offset sign and turns the angle by pi
    a2, o2 = line_pose_from_points(p2, p1)
    assert o2 == pytest.approx(-offset, abs=1e-9)
    assert math.cos(a2 - angle) == pytest.approx(-1.0)


@given(st.lists(st.floats(-300, 300), min_size=8, max_size=8), st.floats(-1, 1))
def test_calibration_recovers_random_models(coefs, zg):
    m = CameraModel(*coefs, zg_fixed=zg)
    if abs(m.a11 * m.a22 - m.a12 * m.a21) < 1.0:
        return
    got = calibrate(synthetic_set(m), zg)
    assert np.allclose(got.rows, m.rows, rtol=1e-9, atol=1e-8)
