"""Static physical-executability checker.

The checks run in a fixed order and the first failing stage names the
failure category:

1. parse (XML, or articulation JSON)          -> ``json-format``
2. kinematic-tree invariants                  -> ``tree-structure``
3. axis norms, limit presence and ordering    -> ``parameter``
4. every referenced mesh loads as a TriMesh   -> ``mesh``
5. joint sweeps: finite orthonormal FK and
   bounded link AABBs                         -> ``motion``

"Parts flying off" is proxied by the AABB bound; joint freezing and
interpenetration need a dynamics engine and are not assessed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .articulation import BASE_LINK, parse_prediction
from .errors import ArtitwinError, ConsistencyViolation, IoError, TreeViolation
from .geometry import TriMesh, load_obj
from .urdf import (
    Inertial,
    LinkSpec,
    MeshRef,
    UrdfModel,
    forward_kinematics,
    joint_parameter_problems,
    read_urdf,
    validate_tree,
    zero_configuration,
)

FAILURE_CATEGORIES = ("none", "json-format", "tree-structure", "parameter", "mesh", "motion")
ORTHO_TOL = 1e-6
DYNAMICS_NOTE = "joint freezing and part interpenetration require dynamics simulation and were not checked"


@dataclass
class SweepConfig:
    samples_per_joint: int = 11
    bound_factor: float = 10.0


@dataclass
class ExecutabilityVerdict:
    passed: bool
    failure_category: str = "none"
    details: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExecutabilityVerdict":
        return cls(**d)


def _record(details: list, check: str, ok: bool, message: str = "") -> bool:
    details.append({"check": check, "passed": ok, "message": message})
    return ok


def _fail(details, notes, category: str) -> ExecutabilityVerdict:
    return ExecutabilityVerdict(False, category, details, notes)


def _model_from_prediction(text: str, base_dir: Path) -> UrdfModel:
    pred = parse_prediction(text)
    names = [BASE_LINK] + [n for n in pred.link_names if n != BASE_LINK]
    links = tuple(
        LinkSpec(n, (MeshRef(f"{n}.obj"),), (MeshRef(f"{n}.obj"),), Inertial()) for n in names
    )
    return UrdfModel("object", links, pred.joints, pred.warnings)


def _resolve(filename: str, base_dir: Path) -> Path:
    if filename.startswith("package://"):
        filename = filename[len("package://") :]
    elif filename.startswith("file://"):
        filename = filename[len("file://") :]
    p = Path(filename)
    return p if p.is_absolute() else base_dir / p


def _link_geometry(model: UrdfModel, base_dir: Path, details: list) -> dict[str, np.ndarray] | None:
    """Vertices of every link's meshes in the link frame, or None on failure."""
    cache: dict[Path, TriMesh] = {}
    geometry: dict[str, np.ndarray] = {}
    ok = True
    for link in model.links:
        chunks = []
        for ref in link.visuals + link.collisions:
            path = _resolve(ref.filename, base_dir)
            if path not in cache:
                try:
                    mesh = load_obj(path)
                except ArtitwinError as exc:
                    ok = _record(details, "mesh", False, f"link {link.name!r}: {exc}")
                    continue
                if len(mesh.faces) == 0:
                    ok = _record(details, "mesh", False, f"link {link.name!r}: {path.name} has no faces")
                    continue
                cache[path] = mesh
            mesh = cache[path]
            T = ref.origin.matrix()
            chunks.append(mesh.vertices @ T[:3, :3].T + T[:3, 3])
        if chunks:
            geometry[link.name] = np.vstack(chunks)
    return geometry if ok else None


def _sweep_values(joint, samples: int) -> np.ndarray | None:
    if joint.joint_type in ("revolute", "prismatic"):
        return np.linspace(joint.limit.lower, joint.limit.upper, samples)
    if joint.joint_type == "continuous":
        return np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    return None


def _pose_problem(model, q, geometry, bound) -> str | None:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        world = forward_kinematics(model, q)
    for name, T in world.items():
        if not np.all(np.isfinite(T)):
            return f"link {name!r} transform is not finite"
        R = T[:3, :3]
        if np.max(np.abs(R.T @ R - np.eye(3))) > ORTHO_TOL or abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
            return f"link {name!r} rotation is not orthonormal"
        pts = geometry.get(name)
        pts = T[:3, 3][None, :] if pts is None else pts @ R.T + T[:3, 3]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        extent = float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))
        if not extent <= bound:
            return f"link {name!r} AABB reaches {extent:.6g} m, bound is {bound:.6g} m"
    return None


def check_model(model_or_text, base_dir, config: SweepConfig | None = None, *, is_json: bool = False) -> ExecutabilityVerdict:
    """Run the ordered checks on URDF/JSON text (or an already-read model)."""
    config = config or SweepConfig()
    base_dir = Path(base_dir)
    details: list[dict] = []
    notes = [DYNAMICS_NOTE]

    # 1. parse
    if isinstance(model_or_text, UrdfModel):
        model = model_or_text
    else:
        try:
            model = _model_from_prediction(model_or_text, base_dir) if is_json else read_urdf(model_or_text)
        except ConsistencyViolation as exc:
            _record(details, "parse", False, str(exc))
            return _fail(details, notes, "tree-structure")
        except ArtitwinError as exc:
            _record(details, "parse", False, str(exc))
            return _fail(details, notes, "json-format")
    _record(details, "parse", True)

    # 2. tree
    try:
        validate_tree(model.links, model.joints)
    except TreeViolation as exc:
        _record(details, "tree", False, str(exc))
        return _fail(details, notes, "tree-structure")
    _record(details, "tree", True)

    # 3. parameters
    problems = [p for j in model.joints for p in joint_parameter_problems(j)]
    problems += [f"link {l.name!r} mass must be positive" for l in model.links if not l.inertial.mass > 0]
    if problems:
        for p in problems:
            _record(details, "parameter", False, p)
        return _fail(details, notes, "parameter")
    _record(details, "parameter", True)

    # 4. meshes
    geometry = _link_geometry(model, base_dir, details)
    if geometry is None:
        return _fail(details, notes, "mesh")
    _record(details, "mesh", True)

    # 5. motion
    radius = max((float(np.max(np.linalg.norm(v, axis=1))) for v in geometry.values()), default=0.0)
    if radius == 0.0:
        radius = 1.0
        notes.append("no link geometry: motion bound uses a 1 m reference radius")
    bound = config.bound_factor * radius
    rest = zero_configuration(model, clip=True)
    problem = _pose_problem(model, rest, geometry, bound)
    for joint in model.moving_joints():
        if problem:
            break
        values = _sweep_values(joint, config.samples_per_joint)
        if values is None:
            notes.append(f"unsupported-motion: {joint.joint_type} joint {joint.id!r} not swept")
            continue
        for value in values:
            q = dict(rest)
            q[joint.id] = float(value)
            problem = _pose_problem(model, q, geometry, bound)
            if problem:
                problem = f"joint {joint.id!r} at q={value:.6g}: {problem}"
                break
    if problem:
        _record(details, "motion", False, problem)
        return _fail(details, notes, "motion")
    _record(details, "motion", True, f"bound {bound:.6g} m over {len(model.moving_joints())} joints")
    return ExecutabilityVerdict(True, "none", details, notes)


def check_executability(model_path, sweep: SweepConfig | None = None) -> ExecutabilityVerdict:
    """Grade a URDF (or articulation JSON) file; only unreadable files raise."""
    path = Path(model_path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(str(exc), path=str(path)) from None
    return check_model(text, path.parent, sweep, is_json=path.suffix.lower() == ".json")
