"""Rigid-body transform helpers (URDF fixed-axis roll-pitch-yaw convention)."""

from __future__ import annotations

import math

import numpy as np

from .errors import DecompositionFailure

_GIMBAL_EPS = 1e-9


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_matrix(rpy) -> np.ndarray:
    """Rotation for URDF ``rpy``: ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    roll, pitch, yaw = (float(v) for v in rpy)
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    ortho = np.max(np.abs(R.T @ R - np.eye(3)))
    return bool(ortho < tol and abs(np.linalg.det(R) - 1.0) <= tol)


def matrix_to_rpy(R: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`rpy_to_matrix`.

    At the gimbal singularity (``|pitch| = pi/2``) roll is fixed to zero and
    the remaining rotation is carried by yaw.
    """
    R = np.asarray(R, dtype=float)
    if not is_rotation(R, 1e-6):
        raise DecompositionFailure("matrix is not a proper rotation")
    cp = math.hypot(R[0, 0], R[1, 0])
    pitch = math.atan2(-R[2, 0], cp)
    if cp < _GIMBAL_EPS:
        roll = 0.0
        yaw = math.atan2(-R[0, 1], R[1, 1])
    else:
        roll = math.atan2(R[2, 1], R[2, 2])
        yaw = math.atan2(R[1, 0], R[0, 0])
    return (roll + 0.0, pitch + 0.0, yaw + 0.0)


def axis_angle_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a (normalized internally) axis."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    x, y, z = a
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def make_transform(R=None, t=None) -> np.ndarray:
    T = np.eye(4)
    if R is not None:
        T[:3, :3] = R
    if t is not None:
        T[:3, 3] = t
    return T


def pose_to_transform(xyz, rpy) -> np.ndarray:
    return make_transform(rpy_to_matrix(rpy), np.asarray(xyz, dtype=float))


def transform_to_pose(T: np.ndarray) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    xyz = tuple(float(v) + 0.0 for v in T[:3, 3])
    return xyz, matrix_to_rpy(T[:3, :3])


def invert_transform(T: np.ndarray) -> np.ndarray:
    R = T[:3, :3]
    return make_transform(R.T, -R.T @ T[:3, 3])
