import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artitwin.errors import DecompositionFailure
from artitwin.transforms import (
    axis_angle_matrix,
    invert_transform,
    is_rotation,
    matrix_to_rpy,
    pose_to_transform,
    rot_x,
    rot_z,
    rpy_to_matrix,
)

angles = st.floats(-math.pi, math.pi, allow_nan=False)


def test_zero_rpy_is_identity():
    assert np.array_equal(rpy_to_matrix((0, 0, 0)), np.eye(3))


def test_quarter_turn_about_x_maps_y_to_z():
    np.testing.assert_allclose(rpy_to_matrix((math.pi / 2, 0, 0)) @ [0, 1, 0], [0, 0, 1], atol=1e-15)


def test_faucet_origin_rpy():
    expected = rot_z(1.5708) @ rot_x(1.5708)
    np.testing.assert_allclose(rpy_to_matrix((1.5708, -0.0, 1.5708)), expected, atol=1e-9)


def test_convention_is_fixed_axis_xyz():
    # extrinsic X then Y then Z, compared against explicit elementary matrices
    r, p, y = 0.3, -0.7, 1.1
    Ry = np.array([[math.cos(p), 0, math.sin(p)], [0, 1, 0], [-math.sin(p), 0, math.cos(p)]])
    np.testing.assert_allclose(rpy_to_matrix((r, p, y)), rot_z(y) @ Ry @ rot_x(r), atol=1e-15)


@settings(max_examples=200)
@given(angles, st.floats(-1.5, 1.5), angles)
def test_rpy_round_trip(r, p, y):
    R = rpy_to_matrix((r, p, y))
    assert is_rotation(R, 1e-12)
    np.testing.assert_allclose(rpy_to_matrix(matrix_to_rpy(R)), R, atol=1e-12)


@pytest.mark.parametrize("pitch", [math.pi / 2, -math.pi / 2])
def test_gimbal_lock_sets_roll_zero(pitch):
    R = rpy_to_matrix((0.4, pitch, -0.9))
    roll, p, yaw = matrix_to_rpy(R)
    assert roll == 0.0
    assert p == pytest.approx(pitch)
    np.testing.assert_allclose(rpy_to_matrix((roll, p, yaw)), R, atol=1e-12)


def test_decomposition_rejects_non_rotation():
    with pytest.raises(DecompositionFailure):
        matrix_to_rpy(np.diag([1.0, 1.0, -1.0]))


def test_axis_angle_matches_elementary_rotation():
    np.testing.assert_allclose(axis_angle_matrix((0, 0, 2.0), 0.8), rot_z(0.8), atol=1e-15)


def test_invert_transform():
    T = pose_to_transform((1, 2, 3), (0.1, 0.2, 0.3))
    np.testing.assert_allclose(invert_transform(T) @ T, np.eye(4), atol=1e-14)
