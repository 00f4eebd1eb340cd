"""Synthetic articulated objects for tests, demos and pipeline smoke runs.

Each object is a small kinematic tree of box-shaped parts.  Writing an object
produces::

    <dir>/<object_id>/model.urdf
    <dir>/<object_id>/meshes/<link>.obj      (box, in the link frame)
    <dir>/<object_id>/cloud.xyzrgb           (surface samples at rest pose)
    <dir>/<object_id>/masks.json             (link -> point indices)
    <dir>/splits.json                        (object_id -> "ID" | "OOD")
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import PartMask, PointCloud, TriMesh, sample_surface, save_cloud, save_masks, save_obj
from .urdf import Inertial, JointSpec, Limit, LinkSpec, MeshRef, Pose, UrdfModel, forward_kinematics, save_urdf

HALF_PI = 1.5708


@dataclass(frozen=True)
class Part:
    name: str
    center: tuple[float, float, float]  # box centre in the link frame
    half: tuple[float, float, float]
    color: tuple[float, float, float] = (0.6, 0.6, 0.6)


@dataclass(frozen=True)
class ObjectSpec:
    object_id: str
    split: str
    parts: tuple[Part, ...]
    joints: tuple[JointSpec, ...]


def box_mesh(center, half) -> TriMesh:
    c = np.asarray(center, dtype=np.float64)
    h = np.asarray(half, dtype=np.float64)
    signs = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64)
    faces = np.array(
        [
            [0, 1, 3], [0, 3, 2],  # -x
            [4, 6, 7], [4, 7, 5],  # +x
            [0, 4, 5], [0, 5, 1],  # -y
            [2, 3, 7], [2, 7, 6],  # +y
            [0, 2, 6], [0, 6, 4],  # -z
            [1, 5, 7], [1, 7, 3],  # +z
        ]
    )
    return TriMesh(c + signs * h, faces)


def _j(jid, jtype, parent, child, xyz=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0), axis=(1.0, 0.0, 0.0), limit=None):
    return JointSpec(jid, jtype, parent, child, Pose(tuple(xyz), tuple(rpy)), tuple(axis), limit)


def faucet() -> ObjectSpec:
    """The faucet of the articulation-JSON example, with box parts."""
    rpy = (HALF_PI, -0.0, HALF_PI)
    joints = (
        _j("joint_0", "revolute", "base", "link_0", (-0.079, -0.48747, -0.0), rpy, (0.0, 1.0, 0.0), Limit(0.0, 1.57)),
        _j("joint_1", "revolute", "base", "link_1", (-0.079, 0.49568, -0.0), rpy, (0.0, -1.0, 0.0), Limit(0.0, 1.57)),
        _j("joint_2", "continuous", "base", "link_2", (-0.079, 0.00411, -0.0), rpy, (0.0, 1.0, 0.0)),
        _j("joint_3", "fixed", "base", "link_3", (0.0, 0.0, 0.0), (HALF_PI, 0.0, HALF_PI), (1.0, 0.0, 0.0)),
    )
    parts = (
        Part("base", (0.0, 0.0, -0.35), (0.12, 0.6, 0.04), (0.3, 0.3, 0.3)),
        Part("link_0", (0.0, 0.06, 0.0), (0.03, 0.06, 0.03), (0.9, 0.1, 0.1)),
        Part("link_1", (0.0, 0.06, 0.0), (0.03, 0.06, 0.03), (0.1, 0.9, 0.1)),
        Part("link_2", (0.0, 0.1, 0.12), (0.03, 0.03, 0.12), (0.1, 0.1, 0.9)),
        Part("link_3", (0.0, -0.2, 0.0), (0.1, 0.1, 0.06), (0.8, 0.8, 0.2)),
    )
    return ObjectSpec("faucet_0", "OOD", parts, joints)


def cabinet() -> ObjectSpec:
    """Door on a hinge plus a drawer nested under a fixed body link."""
    joints = (
        _j("body_mount", "fixed", "base", "body", (0.0, 0.0, 0.4)),
        _j("door_hinge", "revolute", "body", "door", (0.25, -0.3, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 1.0), Limit(0.0, 1.57)),
        _j("drawer_slide", "prismatic", "body", "drawer", (0.2, 0.15, -0.2), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), Limit(0.0, 0.3)),
    )
    parts = (
        Part("base", (0.0, 0.0, 0.02), (0.3, 0.35, 0.02)),
        Part("body", (0.0, 0.0, 0.0), (0.22, 0.3, 0.36), (0.5, 0.4, 0.3)),
        Part("door", (0.01, 0.15, 0.1), (0.01, 0.15, 0.22), (0.7, 0.5, 0.3)),
        Part("drawer", (0.05, 0.0, 0.0), (0.05, 0.14, 0.08), (0.3, 0.5, 0.7)),
    )
    return ObjectSpec("cabinet_0", "ID", parts, joints)


def laptop() -> ObjectSpec:
    joints = (
        _j("hinge", "revolute", "base", "screen", (-0.15, 0.0, 0.02), (0.0, 0.0, 0.0), (0.0, 1.0, 0.0), Limit(-1.9, 0.0)),
    )
    parts = (
        Part("base", (0.0, 0.0, 0.01), (0.15, 0.2, 0.01), (0.2, 0.2, 0.2)),
        Part("screen", (0.0, 0.0, 0.15), (0.005, 0.2, 0.15), (0.1, 0.1, 0.4)),
    )
    return ObjectSpec("laptop_0", "ID", parts, joints)


def storage_box() -> ObjectSpec:
    """Lid on a mount link, two levels below the root."""
    joints = (
        _j("mount", "fixed", "base", "rim", (0.0, 0.0, 0.2), (0.0, 0.0, math.pi / 2)),
        _j("lid_hinge", "revolute", "rim", "lid", (0.0, 0.15, 0.01), (0.1, 0.0, 0.0), (1.0, 0.0, 0.0), Limit(0.0, 2.0)),
    )
    parts = (
        Part("base", (0.0, 0.0, 0.1), (0.2, 0.15, 0.1), (0.6, 0.3, 0.1)),
        Part("rim", (0.0, 0.0, 0.0), (0.16, 0.21, 0.01), (0.4, 0.2, 0.1)),
        Part("lid", (0.0, -0.15, 0.01), (0.2, 0.15, 0.01), (0.8, 0.5, 0.2)),
    )
    return ObjectSpec("box_0", "ID", parts, joints)


def table() -> ObjectSpec:
    joints = (
        _j("left_slide", "prismatic", "base", "drawer_left", (0.3, -0.2, 0.6), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), Limit(0.0, 0.25)),
        _j("right_slide", "prismatic", "base", "drawer_right", (0.3, 0.2, 0.6), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), Limit(0.0, 0.25)),
    )
    parts = (
        Part("base", (0.0, 0.0, 0.7), (0.4, 0.5, 0.03), (0.5, 0.3, 0.1)),
        Part("drawer_left", (-0.1, 0.0, 0.0), (0.1, 0.15, 0.05), (0.2, 0.6, 0.2)),
        Part("drawer_right", (-0.1, 0.0, 0.0), (0.1, 0.15, 0.05), (0.6, 0.2, 0.2)),
    )
    return ObjectSpec("table_0", "ID", parts, joints)


def default_objects() -> list[ObjectSpec]:
    return [faucet(), cabinet(), laptop(), storage_box(), table()]


def build_model(spec: ObjectSpec, mesh_subdir: str = "meshes") -> UrdfModel:
    links = []
    for part in spec.parts:
        ref = MeshRef(f"{mesh_subdir}/{part.name}.obj")
        links.append(LinkSpec(part.name, (ref,), (ref,), Inertial()))
    return UrdfModel(spec.object_id, tuple(links), spec.joints).validate()


def sample_cloud(spec: ObjectSpec, points_per_part: int = 256, seed: int = 0):
    """Surface samples of every part at the rest pose, with ground-truth masks."""
    model = build_model(spec)
    world = forward_kinematics(model, {j.id: 0.0 for j in model.moving_joints()}, check_limits=False)
    rows, masks, start = [], [], 0
    for k, part in enumerate(spec.parts):
        mesh = box_mesh(part.center, part.half).transformed(world[part.name])
        pts = sample_surface(mesh, points_per_part, seed=seed * 1000 + k)
        rows.append(np.hstack([pts, np.tile(part.color, (len(pts), 1))]))
        masks.append(PartMask(part.name, tuple(range(start, start + len(pts)))))
        start += len(pts)
    return PointCloud(np.vstack(rows)), masks


def write_object(spec: ObjectSpec, root, points_per_part: int = 256, seed: int = 0) -> Path:
    obj_dir = Path(root) / spec.object_id
    (obj_dir / "meshes").mkdir(parents=True, exist_ok=True)
    for part in spec.parts:
        save_obj(box_mesh(part.center, part.half), obj_dir / "meshes" / f"{part.name}.obj")
    save_urdf(build_model(spec), obj_dir / "model.urdf")
    cloud, masks = sample_cloud(spec, points_per_part, seed)
    save_cloud(cloud, obj_dir / "cloud.xyzrgb")
    save_masks(masks, obj_dir / "masks.json")
    return obj_dir


def write_fixture_set(root, objects: list[ObjectSpec] | None = None, points_per_part: int = 256, seed: int = 0) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    objects = objects if objects is not None else default_objects()
    for spec in objects:
        write_object(spec, root, points_per_part, seed)
    splits = {spec.object_id: spec.split for spec in objects}
    (root / "splits.json").write_text(json.dumps(splits, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return root
