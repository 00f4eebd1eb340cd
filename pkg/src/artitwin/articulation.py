"""The structured articulation JSON: parsing, serialization, URDF assembly and
a seeded mock predictor that stands in for the language model.

The JSON layout is::

    {"joints": [{"id", "type", "parent", "child",
                 "origin": {"xyz", "rpy"}, "axis", "limit"?: {"lower", "upper"}}],
     "links": {"link_0": "switch[SEG]", ...}}
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConsistencyViolation, JsonSyntax, MissingMesh, SchemaViolation
from .urdf import (
    AXIAL_TYPES,
    AXIS_TOL,
    JOINT_TYPES,
    LIMITED_TYPES,
    Inertial,
    JointSpec,
    Limit,
    LinkSpec,
    MeshRef,
    Pose,
    UrdfModel,
    validate_parameters,
    validate_tree,
)

SEG_TOKEN = "[SEG]"
BASE_LINK = "base"
REPAIR_LIMIT = Limit(0.0, math.pi / 2)

# A predicted joint carries exactly the fields of a URDF joint.
PredictedJoint = JointSpec


@dataclass(frozen=True)
class LinkEntry:
    link_name: str
    category: str
    has_seg_marker: bool = True

    @property
    def raw(self) -> str:
        return self.category + (SEG_TOKEN if self.has_seg_marker else "")


@dataclass(frozen=True)
class ArticulationPrediction:
    joints: tuple[JointSpec, ...] = ()
    links: tuple[LinkEntry, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def link_names(self) -> list[str]:
        return [e.link_name for e in self.links]

    def link(self, name: str) -> LinkEntry:
        for e in self.links:
            if e.link_name == name:
                return e
        raise KeyError(name)

    def articulated_part_count(self) -> int:
        return len({j.child for j in self.joints if j.joint_type != "fixed"})


# ---------------------------------------------------------------------------
# parsing


class _Obj(dict):
    duplicates: list


def _pairs_hook(pairs):
    obj = _Obj()
    obj.duplicates = []
    for k, v in pairs:
        if k in obj:
            obj.duplicates.append(k)
        obj[k] = v
    return obj


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _vec(value, n: int, path: str) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != n:
        got = len(value) if isinstance(value, list) else type(value).__name__
        raise SchemaViolation(f"expected an array of {n} numbers, got {got}", path=path)
    if not all(_is_number(v) for v in value):
        raise SchemaViolation("non-numeric entry", path=path)
    out = tuple(float(v) for v in value)
    if not all(math.isfinite(v) for v in out):
        raise SchemaViolation("non-finite entry", path=path)
    return out


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaViolation(f"missing key {key!r}", path=path)
    return obj[key]


def _parse_joint(obj, k: int, repair: bool, warns: list[str]) -> JointSpec:
    path = f"$.joints[{k}]"
    if not isinstance(obj, dict):
        raise SchemaViolation("joint must be an object", path=path)
    jid = _require(obj, "id", path)
    if not isinstance(jid, str) or not jid:
        raise SchemaViolation("id must be a nonempty string", path=f"{path}.id")
    path = f"$.joints[{k}]({jid})"
    jtype = _require(obj, "type", path)
    if jtype not in JOINT_TYPES:
        raise SchemaViolation(f"unknown joint type {jtype!r}", path=f"{path}.type")
    ends = {}
    for key in ("parent", "child"):
        v = _require(obj, key, path)
        if not isinstance(v, str) or not v:
            raise SchemaViolation(f"{key} must be a nonempty string", path=f"{path}.{key}")
        ends[key] = v
    origin = _require(obj, "origin", path)
    if not isinstance(origin, dict):
        raise SchemaViolation("origin must be an object", path=f"{path}.origin")
    xyz = _vec(_require(origin, "xyz", f"{path}.origin"), 3, f"{path}.origin.xyz")
    rpy = _vec(_require(origin, "rpy", f"{path}.origin"), 3, f"{path}.origin.rpy")
    axis = _vec(_require(obj, "axis", path), 3, f"{path}.axis")
    norm = math.sqrt(sum(a * a for a in axis))
    if jtype in AXIAL_TYPES and norm == 0.0:
        raise SchemaViolation("zero axis on a moving joint", path=f"{path}.axis")
    if norm > 0 and abs(norm - 1.0) > AXIS_TOL:
        axis = tuple(a / norm for a in axis)
        warns.append(f"{path}.axis: renormalized from norm {norm:.9g}")
    limit = None
    if "limit" in obj and obj["limit"] is not None:
        lim = obj["limit"]
        if not isinstance(lim, dict):
            raise SchemaViolation("limit must be an object", path=f"{path}.limit")
        lo = _vec([_require(lim, "lower", f"{path}.limit")], 1, f"{path}.limit.lower")[0]
        hi = _vec([_require(lim, "upper", f"{path}.limit")], 1, f"{path}.limit.upper")[0]
        if lo > hi:
            raise SchemaViolation("limit lower > upper", path=f"{path}.limit")
        if jtype == "continuous":
            warns.append(f"{path}.limit: ignored on continuous joint")
        else:
            limit = Limit(lo, hi)
    elif jtype in LIMITED_TYPES:
        if repair and jtype == "revolute":
            limit = REPAIR_LIMIT
            warns.append(f"{path}.limit: repaired to [0, pi/2]")
        else:
            raise SchemaViolation(f"{jtype} joint requires a limit", path=f"{path}.limit")
    return JointSpec(jid, jtype, ends["parent"], ends["child"], Pose(xyz, rpy), axis, limit)


def _parse_link_entry(name: str, raw, path: str) -> LinkEntry:
    if not isinstance(raw, str):
        raise SchemaViolation("link description must be a string", path=path)
    count = raw.count(SEG_TOKEN)
    if count == 0:
        return LinkEntry(name, raw, False)
    if count > 1 or not raw.endswith(SEG_TOKEN):
        raise SchemaViolation(f"{SEG_TOKEN} must appear once, as a suffix", path=path)
    return LinkEntry(name, raw[: -len(SEG_TOKEN)], True)


def parse_prediction(json_text: str, *, repair: bool = False, require_base: bool = False) -> ArticulationPrediction:
    """Parse and validate an articulation prediction.

    ``repair`` fills a missing revolute limit with ``[0, pi/2]`` instead of
    failing; ``require_base`` demands that ``base`` be declared in ``links``.
    """
    try:
        doc = json.loads(json_text, object_pairs_hook=_pairs_hook)
    except json.JSONDecodeError as exc:
        raise JsonSyntax(f"{exc.msg} (line {exc.lineno}, column {exc.colno})", path="$") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("top level must be an object", path="$")
    joints_raw = _require(doc, "joints", "$")
    links_raw = _require(doc, "links", "$")
    if not isinstance(joints_raw, list):
        raise SchemaViolation("joints must be an array", path="$.joints")
    if not isinstance(links_raw, dict):
        raise SchemaViolation("links must be an object", path="$.links")
    if getattr(links_raw, "duplicates", None):
        raise ConsistencyViolation(f"duplicate link name {links_raw.duplicates[0]!r}", path="$.links")
    warns: list[str] = []
    joints = tuple(_parse_joint(obj, k, repair, warns) for k, obj in enumerate(joints_raw))
    links = tuple(_parse_link_entry(name, raw, f"$.links.{name}") for name, raw in links_raw.items())
    declared = {e.link_name for e in links}
    if require_base and BASE_LINK not in declared:
        raise ConsistencyViolation("link 'base' must be declared", path="$.links")
    known = declared | {BASE_LINK}
    for k, j in enumerate(joints):
        for key in ("parent", "child"):
            ref = getattr(j, key)
            if ref not in known:
                raise ConsistencyViolation(
                    f"joint {j.id!r} references undeclared link {ref!r}", path=f"$.joints[{k}]({j.id}).{key}"
                )
    return ArticulationPrediction(joints, links, tuple(warns))


def load_prediction(path, **kwargs) -> ArticulationPrediction:
    with open(path, encoding="utf-8") as fh:
        return parse_prediction(fh.read(), **kwargs)


# ---------------------------------------------------------------------------
# serialization


def prediction_to_dict(pred: ArticulationPrediction) -> dict:
    joints = []
    for j in pred.joints:
        item = {
            "id": j.id,
            "type": j.joint_type,
            "parent": j.parent,
            "child": j.child,
            "origin": {"xyz": list(j.origin.xyz), "rpy": list(j.origin.rpy)},
            "axis": list(j.axis),
        }
        if j.limit is not None:
            item["limit"] = {"lower": j.limit.lower, "upper": j.limit.upper}
        joints.append(item)
    return {"joints": joints, "links": {e.link_name: e.raw for e in pred.links}}


def serialize_prediction(pred: ArticulationPrediction, indent: int | None = 4) -> str:
    return json.dumps(prediction_to_dict(pred), indent=indent)


# ---------------------------------------------------------------------------
# assembly


def assemble_urdf(
    pred: ArticulationPrediction,
    mesh_dir,
    *,
    urdf_dir=None,
    allow_missing_mesh: bool = False,
    name: str = "object",
) -> UrdfModel:
    """Build a URDF model: ``base`` plus one link per predicted link.

    Each link references ``<mesh_dir>/<link>.obj`` as both visual and
    collision geometry with identity local pose; filenames are written
    relative to ``urdf_dir`` when given.  Inertials get placeholder values.
    """
    mesh_dir = Path(mesh_dir)
    names = [BASE_LINK] + [n for n in pred.link_names if n != BASE_LINK]
    links = []
    for lname in names:
        mesh_path = mesh_dir / f"{lname}.obj"
        if not allow_missing_mesh and not mesh_path.is_file():
            raise MissingMesh(f"mesh file {str(mesh_path)!r} not found", path=f"$.links.{lname}")
        filename = os.path.relpath(mesh_path, urdf_dir) if urdf_dir is not None else str(mesh_path)
        ref = MeshRef(Path(filename).as_posix())
        links.append(LinkSpec(lname, (ref,), (ref,), Inertial()))
    model = UrdfModel(name, tuple(links), tuple(pred.joints), pred.warnings)
    validate_tree(model.links, model.joints)
    validate_parameters(model)
    return model


# ---------------------------------------------------------------------------
# mock predictor


@dataclass(frozen=True)
class NoiseSpec:
    axis_tilt_rad: float = 0.0
    origin_sigma_m: float = 0.0
    type_flip_prob: float = 0.0
    drop_part_prob: float = 0.0

    def __post_init__(self):
        if self.axis_tilt_rad < 0 or self.origin_sigma_m < 0:
            raise ValueError("noise magnitudes must be non-negative")
        for p in (self.type_flip_prob, self.drop_part_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict | None) -> "NoiseSpec":
        return cls(**(d or {}))

    def to_dict(self) -> dict:
        return {
            "axis_tilt_rad": self.axis_tilt_rad,
            "origin_sigma_m": self.origin_sigma_m,
            "type_flip_prob": self.type_flip_prob,
            "drop_part_prob": self.drop_part_prob,
        }


_FLIP_TYPES = ("revolute", "prismatic", "continuous", "fixed")


def tilt_axis(axis, angle: float, direction) -> tuple[float, float, float]:
    """Rotate ``axis`` by exactly ``angle`` towards ``direction`` (projected perpendicular)."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    u = np.asarray(direction, dtype=float)
    u = u - (u @ a) * a
    n = np.linalg.norm(u)
    if n < 1e-12:
        # direction parallel to the axis: fall back to any perpendicular
        u = np.cross(a, [1.0, 0.0, 0.0] if abs(a[0]) < 0.9 else [0.0, 1.0, 0.0])
        n = np.linalg.norm(u)
    u = u / n
    out = math.cos(angle) * a + math.sin(angle) * u
    out = out / np.linalg.norm(out)
    return tuple(float(v) for v in out)


def mock_predict(
    gt: UrdfModel,
    noise: NoiseSpec = NoiseSpec(),
    seed: int = 0,
    categories: dict[str, str] | None = None,
) -> ArticulationPrediction:
    """Produce a prediction from a ground-truth model with seeded corruption.

    With zero noise the result is the exact JSON image of ``gt`` (its root is
    presented as ``base``).  Every joint consumes the same random draws
    whatever the noise settings, so changing one knob never reshuffles the
    others.
    """
    root = gt.root
    if root != BASE_LINK and BASE_LINK in gt.link_names:
        raise SchemaViolation("model has a non-root link named 'base'")
    rename = (lambda n: BASE_LINK if n == root else n)
    categories = categories or {}
    rng = np.random.default_rng(seed)
    joints: list[JointSpec] = []
    dropped: set[str] = set()
    for j in gt.joints:
        tilt_dir = rng.standard_normal(3)
        origin_noise = rng.standard_normal(3)
        flip_u, flip_choice, drop_u = rng.random(3)

        if drop_u < noise.drop_part_prob:
            dropped.add(j.child)
            continue
        axis = j.axis
        if noise.axis_tilt_rad > 0 and any(axis):
            axis = tilt_axis(axis, noise.axis_tilt_rad, tilt_dir)
        xyz = j.origin.xyz
        if noise.origin_sigma_m > 0:
            xyz = tuple(float(v) for v in np.asarray(xyz) + noise.origin_sigma_m * origin_noise)
        jtype, limit = j.joint_type, j.limit
        if flip_u < noise.type_flip_prob:
            options = [t for t in _FLIP_TYPES if t != jtype]
            jtype = options[min(int(flip_choice * len(options)), len(options) - 1)]
            if jtype in LIMITED_TYPES:
                limit = limit or REPAIR_LIMIT
            else:
                limit = None
            if not any(axis):
                axis = (1.0, 0.0, 0.0)
        joints.append(JointSpec(j.id, jtype, rename(j.parent), rename(j.child), Pose(xyz, j.origin.rpy), axis, limit))
    if dropped:
        joints = [
            JointSpec(j.id, j.joint_type, BASE_LINK, j.child, j.origin, j.axis, j.limit) if j.parent in dropped else j
            for j in joints
        ]
    links = tuple(
        LinkEntry(l.name, categories.get(l.name, l.name), True)
        for l in gt.links
        if l.name != root and l.name not in dropped
    )
    return ArticulationPrediction(tuple(joints), links)
