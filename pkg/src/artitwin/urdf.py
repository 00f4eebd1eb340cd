"""URDF data model, XML parsing/emission, tree validation and forward kinematics.

Only the subset of URDF needed for articulated-object digital twins is
modelled: links with mesh visuals/collisions and an inertial block, and joints
with origin, axis and limits.  Everything else is ignored with a warning
recorded on the parsed model.
"""

from __future__ import annotations

import math
import warnings
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    InvariantViolation,
    LimitViolation,
    MissingConfiguration,
    SchemaViolation,
    TreeViolation,
    XmlSyntax,
)
from .transforms import axis_angle_matrix, make_transform, pose_to_transform

JOINT_TYPES = ("prismatic", "revolute", "continuous", "floating", "planar", "fixed")
AXIAL_TYPES = frozenset({"prismatic", "revolute", "continuous", "planar"})
LIMITED_TYPES = frozenset({"prismatic", "revolute"})
AXIS_TOL = 1e-6

DEFAULT_MASS = 1.0
DEFAULT_INERTIA = (1e-3, 1e-3, 1e-3)


class UnsupportedMotionWarning(UserWarning):
    """Raised (as a warning) when FK meets a floating or planar joint."""


Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class Pose:
    xyz: Vec3 = (0.0, 0.0, 0.0)
    rpy: Vec3 = (0.0, 0.0, 0.0)

    def matrix(self) -> np.ndarray:
        return pose_to_transform(self.xyz, self.rpy)

    def is_identity(self) -> bool:
        return not any(self.xyz) and not any(self.rpy)


@dataclass(frozen=True)
class Limit:
    lower: float
    upper: float


@dataclass(frozen=True)
class MeshRef:
    filename: str
    origin: Pose = Pose()
    rgba: tuple[float, float, float, float] | None = None


@dataclass(frozen=True)
class Inertial:
    mass: float = DEFAULT_MASS
    inertia_diag: Vec3 = DEFAULT_INERTIA
    inertia_offdiag: Vec3 = (0.0, 0.0, 0.0)  # ixy, ixz, iyz
    origin: Pose = Pose()


@dataclass(frozen=True)
class LinkSpec:
    name: str
    visuals: tuple[MeshRef, ...] = ()
    collisions: tuple[MeshRef, ...] = ()
    inertial: Inertial = Inertial()

    @property
    def visual_mesh(self) -> MeshRef | None:
        return self.visuals[0] if self.visuals else None

    @property
    def collision_mesh(self) -> MeshRef | None:
        return self.collisions[0] if self.collisions else None


@dataclass(frozen=True)
class JointSpec:
    id: str
    joint_type: str
    parent: str
    child: str
    origin: Pose = Pose()
    axis: Vec3 = (1.0, 0.0, 0.0)
    limit: Limit | None = None


@dataclass(frozen=True)
class UrdfModel:
    name: str
    links: tuple[LinkSpec, ...]
    joints: tuple[JointSpec, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def link(self, name: str) -> LinkSpec:
        for link in self.links:
            if link.name == name:
                return link
        raise KeyError(name)

    def joint(self, joint_id: str) -> JointSpec:
        for joint in self.joints:
            if joint.id == joint_id:
                return joint
        raise KeyError(joint_id)

    @property
    def link_names(self) -> list[str]:
        return [link.name for link in self.links]

    @property
    def root(self) -> str:
        return find_root(self.links, self.joints)

    def moving_joints(self) -> list[JointSpec]:
        return [j for j in self.joints if j.joint_type != "fixed"]

    def articulated_part_count(self) -> int:
        """Number of links attached through a non-fixed joint."""
        return len({j.child for j in self.moving_joints()})

    def validate(self) -> "UrdfModel":
        validate_tree(self.links, self.joints)
        validate_parameters(self)
        return self


# ---------------------------------------------------------------------------
# validation


def find_root(links: Iterable[LinkSpec], joints: Iterable[JointSpec]) -> str:
    children = {j.child for j in joints}
    roots = [link.name for link in links if link.name not in children]
    if len(roots) != 1:
        raise TreeViolation(f"expected exactly one root link, found {len(roots)}: {roots}")
    return roots[0]


def validate_tree(links: Iterable[LinkSpec], joints: Iterable[JointSpec]) -> str:
    """Check the parent/child relation forms a tree; return the root name."""
    links = list(links)
    joints = list(joints)
    names = [link.name for link in links]
    if not names:
        raise TreeViolation("model has no links")
    seen: set[str] = set()
    for name in names:
        if not name:
            raise TreeViolation("link with empty name")
        if name in seen:
            raise TreeViolation(f"duplicate link name {name!r}")
        seen.add(name)
    ids: set[str] = set()
    parent_of: dict[str, str] = {}
    for j in joints:
        if j.id in ids:
            raise TreeViolation(f"duplicate joint id {j.id!r}")
        ids.add(j.id)
        for role, ref in (("parent", j.parent), ("child", j.child)):
            if ref not in seen:
                raise TreeViolation(f"joint {j.id!r} {role} {ref!r} is not a declared link")
        if j.parent == j.child:
            raise TreeViolation(f"joint {j.id!r} connects link {j.child!r} to itself")
        if j.child in parent_of:
            raise TreeViolation(f"link {j.child!r} is the child of more than one joint")
        parent_of[j.child] = j.parent
    # cycles: walk up from every link
    for start in names:
        node, steps = start, 0
        while node in parent_of:
            node = parent_of[node]
            steps += 1
            if node == start or steps > len(names):
                raise TreeViolation(f"kinematic cycle through link {start!r}")
    root = find_root(links, joints)
    reached = {root}
    queue = deque([root])
    kids: dict[str, list[str]] = {}
    for child, parent in parent_of.items():
        kids.setdefault(parent, []).append(child)
    while queue:
        for c in kids.get(queue.popleft(), []):
            if c not in reached:
                reached.add(c)
                queue.append(c)
    if len(reached) != len(names):
        missing = [n for n in names if n not in reached]
        raise TreeViolation(f"links not connected to root {root!r}: {missing}")
    return root


def joint_parameter_problems(joint: JointSpec) -> list[str]:
    problems = []
    values = list(joint.origin.xyz) + list(joint.origin.rpy) + list(joint.axis)
    if joint.limit is not None:
        values += [joint.limit.lower, joint.limit.upper]
    if not all(math.isfinite(v) for v in values):
        problems.append(f"joint {joint.id!r} has non-finite parameters")
    if joint.joint_type not in JOINT_TYPES:
        problems.append(f"joint {joint.id!r} has unknown type {joint.joint_type!r}")
    if joint.joint_type in AXIAL_TYPES:
        norm = math.sqrt(sum(a * a for a in joint.axis))
        if abs(norm - 1.0) > AXIS_TOL:
            problems.append(f"joint {joint.id!r} axis norm {norm:.6g} is not unit")
    if joint.joint_type in LIMITED_TYPES:
        if joint.limit is None:
            problems.append(f"{joint.joint_type} joint {joint.id!r} has no limit")
        elif not joint.limit.lower <= joint.limit.upper:
            problems.append(f"joint {joint.id!r} limit lower > upper")
    return problems


def validate_parameters(model: UrdfModel) -> None:
    for j in model.joints:
        problems = joint_parameter_problems(j)
        if problems:
            raise SchemaViolation(problems[0], path=f"joint[{j.id}]")
    for link in model.links:
        if not link.inertial.mass > 0:
            raise SchemaViolation(f"link {link.name!r} mass must be positive", path=f"link[{link.name}]")


# ---------------------------------------------------------------------------
# parsing


def _floats(text: str | None, n: int, what: str, default=None) -> tuple[float, ...]:
    if text is None:
        if default is None:
            raise SchemaViolation("missing attribute", path=what)
        return default
    try:
        vals = tuple(float(t) for t in text.split())
    except ValueError:
        raise SchemaViolation(f"bad number {text!r}", path=what) from None
    if len(vals) != n:
        raise SchemaViolation(f"expected {n} numbers, got {len(vals)}", path=what)
    if not all(math.isfinite(v) for v in vals):
        raise SchemaViolation(f"non-finite number in {text!r}", path=what)
    return vals


def _float(el: ET.Element, attr: str, what: str, default=None) -> float:
    return _floats(el.get(attr), 1, f"{what}@{attr}", None if default is None else (default,))[0]


def _origin(el: ET.Element | None, what: str) -> Pose:
    if el is None:
        return Pose()
    xyz = _floats(el.get("xyz"), 3, f"{what}/origin@xyz", (0.0, 0.0, 0.0))
    rpy = _floats(el.get("rpy"), 3, f"{what}/origin@rpy", (0.0, 0.0, 0.0))
    return Pose(xyz, rpy)


def _mesh_refs(link_el: ET.Element, tag: str, lname: str, warns: list[str]) -> tuple[MeshRef, ...]:
    refs = []
    for k, el in enumerate(link_el.findall(tag)):
        what = f"link[{lname}]/{tag}[{k}]"
        geom = el.find("geometry")
        mesh = geom.find("mesh") if geom is not None else None
        if mesh is None:
            warns.append(f"{what}: non-mesh geometry ignored")
            continue
        filename = mesh.get("filename")
        if not filename:
            raise SchemaViolation("mesh without filename", path=what)
        rgba = None
        color = el.find("material/color")
        if color is not None and color.get("rgba"):
            rgba = _floats(color.get("rgba"), 4, f"{what}/material/color@rgba")
        refs.append(MeshRef(filename, _origin(el.find("origin"), what), rgba))
    return tuple(refs)


def _parse_link(el: ET.Element, warns: list[str]) -> LinkSpec:
    name = el.get("name")
    if not name:
        raise SchemaViolation("link without name", path="link")
    for child in el:
        if child.tag not in ("visual", "collision", "inertial"):
            warns.append(f"link[{name}]: unknown element <{child.tag}> ignored")
    inertial = Inertial()
    iel = el.find("inertial")
    if iel is not None:
        what = f"link[{name}]/inertial"
        mass_el = iel.find("mass")
        mass = _float(mass_el, "value", f"{what}/mass") if mass_el is not None else DEFAULT_MASS
        inertia_el = iel.find("inertia")
        diag, off = DEFAULT_INERTIA, (0.0, 0.0, 0.0)
        if inertia_el is not None:
            w = f"{what}/inertia"
            diag = tuple(_float(inertia_el, k, w) for k in ("ixx", "iyy", "izz"))
            off = tuple(_float(inertia_el, k, w, 0.0) for k in ("ixy", "ixz", "iyz"))
        inertial = Inertial(mass, diag, off, _origin(iel.find("origin"), what))
    return LinkSpec(
        name,
        _mesh_refs(el, "visual", name, warns),
        _mesh_refs(el, "collision", name, warns),
        inertial,
    )


_JOINT_CHILDREN = {"origin", "parent", "child", "axis", "limit"}


def _parse_joint(el: ET.Element, warns: list[str]) -> JointSpec:
    jid = el.get("name")
    if not jid:
        raise SchemaViolation("joint without name", path="joint")
    what = f"joint[{jid}]"
    jtype = el.get("type")
    if jtype not in JOINT_TYPES:
        raise SchemaViolation(f"unknown joint type {jtype!r}", path=what)
    for child in el:
        if child.tag not in _JOINT_CHILDREN:
            warns.append(f"{what}: unknown element <{child.tag}> ignored")
    links = {}
    for role in ("parent", "child"):
        ref = el.find(role)
        if ref is None or not ref.get("link"):
            raise SchemaViolation(f"missing <{role} link=...>", path=what)
        links[role] = ref.get("link")
    axis_el = el.find("axis")
    axis = _floats(axis_el.get("xyz") if axis_el is not None else None, 3, f"{what}/axis@xyz", (1.0, 0.0, 0.0))
    norm = math.sqrt(sum(a * a for a in axis))
    if norm > 0 and abs(norm - 1.0) > AXIS_TOL:
        axis = tuple(a / norm for a in axis)
        warns.append(f"{what}: axis renormalized from norm {norm:.9g}")
    limit = None
    lim_el = el.find("limit")
    if lim_el is not None:
        if jtype == "continuous":
            warns.append(f"{what}: limit on continuous joint ignored")
        else:
            limit = Limit(_float(lim_el, "lower", f"{what}/limit", 0.0), _float(lim_el, "upper", f"{what}/limit", 0.0))
    return JointSpec(jid, jtype, links["parent"], links["child"], _origin(el.find("origin"), what), axis, limit)


def read_urdf(xml_text: str) -> UrdfModel:
    """Parse without tree/parameter validation.

    Raises only for XML syntax and malformed elements; used by the
    executability checker, which grades the remaining problems itself.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise XmlSyntax(str(exc)) from None
    if root.tag != "robot":
        raise SchemaViolation(f"root element is <{root.tag}>, expected <robot>")
    warns: list[str] = []
    links, joints = [], []
    for el in root:
        if el.tag == "link":
            links.append(_parse_link(el, warns))
        elif el.tag == "joint":
            joints.append(_parse_joint(el, warns))
        else:
            warns.append(f"robot: unknown element <{el.tag}> ignored")
    return UrdfModel(root.get("name", ""), tuple(links), tuple(joints), tuple(warns))


def parse_urdf(xml_text: str) -> UrdfModel:
    """Parse and fully validate a URDF document.

    A zero axis on a moving joint, a missing or inverted limit on a revolute or
    prismatic joint, and a non-positive mass are reported as
    :class:`SchemaViolation`; structural problems as :class:`TreeViolation`.
    """
    model = read_urdf(xml_text)
    validate_tree(model.links, model.joints)
    validate_parameters(model)
    return model


def load_urdf(path) -> UrdfModel:
    with open(path, encoding="utf-8") as fh:
        return parse_urdf(fh.read())


# ---------------------------------------------------------------------------
# emission


def format_float(x: float) -> str:
    """Shortest round-trip decimal, with integral values written bare."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _fmt(values) -> str:
    return " ".join(format_float(v) for v in values)


def _origin_el(parent: ET.Element, pose: Pose) -> None:
    ET.SubElement(parent, "origin", xyz=_fmt(pose.xyz), rpy=_fmt(pose.rpy))


def _mesh_el(parent: ET.Element, tag: str, ref: MeshRef) -> None:
    el = ET.SubElement(parent, tag)
    _origin_el(el, ref.origin)
    geom = ET.SubElement(el, "geometry")
    ET.SubElement(geom, "mesh", filename=ref.filename)
    if ref.rgba is not None:
        mat = ET.SubElement(el, "material", name="")
        ET.SubElement(mat, "color", rgba=_fmt(ref.rgba))


def emit_urdf(model: UrdfModel) -> str:
    try:
        model.validate()
    except (TreeViolation, SchemaViolation) as exc:
        raise InvariantViolation(str(exc)) from None
    robot = ET.Element("robot", name=model.name)
    for link in model.links:
        lel = ET.SubElement(robot, "link", name=link.name)
        for ref in link.visuals:
            _mesh_el(lel, "visual", ref)
        for ref in link.collisions:
            _mesh_el(lel, "collision", ref)
        inertial = link.inertial
        iel = ET.SubElement(lel, "inertial")
        _origin_el(iel, inertial.origin)
        ET.SubElement(iel, "mass", value=format_float(inertial.mass))
        ixx, iyy, izz = inertial.inertia_diag
        ixy, ixz, iyz = inertial.inertia_offdiag
        ET.SubElement(
            iel,
            "inertia",
            ixx=format_float(ixx),
            ixy=format_float(ixy),
            ixz=format_float(ixz),
            iyy=format_float(iyy),
            iyz=format_float(iyz),
            izz=format_float(izz),
        )
    for joint in model.joints:
        jel = ET.SubElement(robot, "joint", name=joint.id, type=joint.joint_type)
        _origin_el(jel, joint.origin)
        ET.SubElement(jel, "parent", link=joint.parent)
        ET.SubElement(jel, "child", link=joint.child)
        ET.SubElement(jel, "axis", xyz=_fmt(joint.axis))
        if joint.limit is not None:
            ET.SubElement(
                jel, "limit", lower=format_float(joint.limit.lower), upper=format_float(joint.limit.upper)
            )
    ET.indent(robot, space="  ")
    return '<?xml version="1.0"?>\n' + ET.tostring(robot, encoding="unicode") + "\n"


def save_urdf(model: UrdfModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_urdf(model))


# ---------------------------------------------------------------------------
# kinematics


def traversal_order(model: UrdfModel) -> list[JointSpec]:
    """Joints in breadth-first order from the root (parents before children)."""
    by_parent: dict[str, list[JointSpec]] = {}
    for j in model.joints:
        by_parent.setdefault(j.parent, []).append(j)
    order = []
    queue = deque([model.root])
    while queue:
        for j in by_parent.get(queue.popleft(), []):
            order.append(j)
            queue.append(j.child)
    return order


def joint_motion(joint: JointSpec, q: float) -> np.ndarray:
    t = joint.joint_type
    if t in ("revolute", "continuous"):
        return make_transform(axis_angle_matrix(joint.axis, q))
    if t == "prismatic":
        return make_transform(t=q * np.asarray(joint.axis, dtype=float))
    if t in ("floating", "planar"):
        warnings.warn(f"unsupported-motion: {t} joint {joint.id!r} treated as identity", UnsupportedMotionWarning)
    return np.eye(4)


def forward_kinematics(
    model: UrdfModel, q: Mapping[str, float] | None = None, *, check_limits: bool = True
) -> dict[str, np.ndarray]:
    """World transform of every link for joint configuration ``q``.

    ``q`` must hold a value for every non-fixed joint; revolute and prismatic
    values must lie inside the joint limits unless ``check_limits`` is off.
    """
    q = q or {}
    world = {model.root: np.eye(4)}
    for j in traversal_order(model):
        if j.joint_type == "fixed":
            value = 0.0
        else:
            if j.id not in q:
                raise MissingConfiguration(f"no value for joint {j.id!r}")
            value = float(q[j.id])
            if check_limits and j.limit is not None and j.joint_type in LIMITED_TYPES:
                if value < j.limit.lower - 1e-12 or value > j.limit.upper + 1e-12:
                    raise LimitViolation(
                        f"joint {j.id!r} value {value} outside [{j.limit.lower}, {j.limit.upper}]"
                    )
        world[j.child] = world[j.parent] @ j.origin.matrix() @ joint_motion(j, value)
    return world


def zero_configuration(model: UrdfModel, clip: bool = False) -> dict[str, float]:
    """q = 0 for every non-fixed joint (optionally clipped into the limits)."""
    q = {}
    for j in model.moving_joints():
        v = 0.0
        if clip and j.limit is not None and j.joint_type in LIMITED_TYPES:
            v = min(max(v, j.limit.lower), j.limit.upper)
        q[j.id] = v
    return q


def with_joints(model: UrdfModel, joints: Iterable[JointSpec]) -> UrdfModel:
    return replace(model, joints=tuple(joints))
