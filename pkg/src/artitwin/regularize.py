"""Dataset canonicalization: flatten every kinematic tree onto a single ``base``
root and keep one visual/collision mesh per link."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DecompositionFailure, SchemaViolation
from .transforms import is_rotation, transform_to_pose
from .urdf import LinkSpec, Pose, UrdfModel, forward_kinematics, validate_parameters, validate_tree, zero_configuration

BASE_LINK = "base"


@dataclass
class RegularizationReport:
    reparented_joints: list[str] = field(default_factory=list)
    consolidated_links: list[tuple[str, int]] = field(default_factory=list)
    base_link: str = BASE_LINK
    renamed_root: str | None = None

    def to_dict(self) -> dict:
        return {
            "reparented_joints": list(self.reparented_joints),
            "consolidated_links": [[name, count] for name, count in self.consolidated_links],
            "base_link": self.base_link,
            "renamed_root": self.renamed_root,
        }


def _rename_root(model: UrdfModel, report: RegularizationReport) -> UrdfModel:
    root = model.root
    if root == BASE_LINK:
        return model
    if BASE_LINK in model.link_names:
        raise SchemaViolation(f"cannot rename root {root!r}: a non-root link is already named 'base'")
    report.renamed_root = root
    links = tuple(replace(l, name=BASE_LINK) if l.name == root else l for l in model.links)
    joints = tuple(replace(j, parent=BASE_LINK) if j.parent == root else j for j in model.joints)
    return replace(model, links=links, joints=joints)


def _consolidate(link: LinkSpec, report: RegularizationReport) -> LinkSpec:
    # first-found entry keeps its local transform
    if len(link.visuals) <= 1 and len(link.collisions) <= 1:
        return link
    report.consolidated_links.append((link.name, max(len(link.visuals), len(link.collisions))))
    return replace(link, visuals=link.visuals[:1], collisions=link.collisions[:1])


def regularize(model: UrdfModel) -> tuple[UrdfModel, RegularizationReport]:
    """Re-parent every joint to ``base`` with its zero-configuration pose.

    Each joint origin becomes the base-to-child transform at q = 0, so every
    link keeps its rest pose.  Types, axes and limits are untouched.
    """
    validate_tree(model.links, model.joints)
    report = RegularizationReport()
    model = _rename_root(model, report)
    world = forward_kinematics(model, zero_configuration(model), check_limits=False)
    joints = []
    for j in model.joints:
        if j.parent == BASE_LINK:
            joints.append(j)
            continue
        T = world[j.child]
        if not is_rotation(T[:3, :3], 1e-9):
            raise DecompositionFailure(f"rest transform of {j.child!r} is not orthonormal")
        xyz, rpy = transform_to_pose(T)
        joints.append(replace(j, parent=BASE_LINK, origin=Pose(xyz, rpy)))
        report.reparented_joints.append(j.id)
    links = tuple(_consolidate(l, report) for l in model.links)
    out = replace(model, links=links, joints=tuple(joints))
    validate_tree(out.links, out.joints)
    validate_parameters(out)
    return out, report


def filter_by_part_count(models, max_parts: int) -> list[UrdfModel]:
    """Keep models with strictly fewer than ``max_parts`` articulated parts."""
    if max_parts < 1:
        raise ValueError("max_parts must be >= 1")
    return [m for m in models if m.articulated_part_count() < max_parts]


def max_pose_deviation(before: UrdfModel, after: UrdfModel) -> float:
    """Largest entrywise difference between rest-pose link transforms."""
    wb = forward_kinematics(before, zero_configuration(before), check_limits=False)
    wa = forward_kinematics(after, zero_configuration(after), check_limits=False)
    rename = {before.root: after.root}
    return max(float(np.max(np.abs(T - wa[rename.get(name, name)]))) for name, T in wb.items())
