"""Batch pipeline: regularize ground truth, mock-predict, segment, mesh,
assemble, then score executability, joints, segmentation and shape."""

from __future__ import annotations

import json
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .articulation import NoiseSpec, assemble_urdf, mock_predict, serialize_prediction
from .errors import ArtitwinError, DegenerateGeometry
from .executability import ExecutabilityVerdict, SweepConfig, check_executability
from .geometry import PartMask, load_cloud, load_masks, load_obj, mesh_chamfer, points_to_mesh, save_masks, save_obj
from .metrics import JointErrors, SegResult, eval_joints, eval_segmentation
from .regularize import regularize
from .report import EvalReport, aggregate_report
from .seg_decoder import binarize, oracle_decoder, score_points
from .transforms import invert_transform
from .urdf import forward_kinematics, load_urdf, save_urdf

WORKERS_ENV = "ARTITWIN_WORKERS"


@dataclass
class PipelineConfig:
    objects_dir: str = "fixtures"
    out_dir: str = "results"
    splits: str | None = None  # defaults to <objects_dir>/splits.json
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    policy: str = "hungarian-origin"
    axis_line: bool = False
    sign_invariant: bool = False
    mesh_method: str = "convex-hull"
    alpha: float | None = None
    threshold: float = 0.5
    samples_per_joint: int = 11
    bound_factor: float = 10.0
    cd_samples: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.noise, dict):
            self.noise = NoiseSpec.from_dict(self.noise)
        if Path(self.objects_dir).resolve() == Path(self.out_dir).resolve():
            raise ValueError("objects_dir and out_dir must differ")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = self.noise.to_dict()
        return d


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def object_seed(seed: int, object_id: str) -> list[int]:
    return [int(seed), zlib.crc32(object_id.encode("utf-8"))]


def list_objects(objects_dir) -> list[str]:
    root = Path(objects_dir)
    return sorted(p.name for p in root.iterdir() if p.is_dir() and (p / "model.urdf").is_file())


def _failed(category: str, message: str) -> ExecutabilityVerdict:
    return ExecutabilityVerdict(False, category, [{"check": "pipeline", "passed": False, "message": message}])


def run_object(object_id: str, config: PipelineConfig) -> dict:
    """Process one object; failures are returned as data, never raised."""
    src = Path(config.objects_dir) / object_id
    dst = Path(config.out_dir) / object_id
    (dst / "meshes").mkdir(parents=True, exist_ok=True)
    result: dict = {"object": object_id, "errors": []}
    try:
        gt, reg_report = regularize(load_urdf(src / "model.urdf"))
        cloud = load_cloud(src / "cloud.xyzrgb")
        gt_masks = {m.part_name: m for m in load_masks(src / "masks.json")}
    except ArtitwinError as exc:
        result["errors"].append(exc.to_dict())
        result["verdict"] = _failed("json-format", str(exc)).to_dict()
        result["joints"] = JointErrors(None, None, None).to_dict()
        result["segmentation"] = SegResult(0.0, False).to_dict()
        result["chamfer"] = None
        return result
    result["regularization"] = reg_report.to_dict()

    pred = mock_predict(gt, config.noise, object_seed(config.seed, object_id))
    (dst / "prediction.json").write_text(serialize_prediction(pred) + "\n", encoding="utf-8")

    # segmentation through the [SEG] decoder with oracle point features
    parts = [l.name for l in gt.links if l.name != gt.root]
    labels = np.full(len(cloud), -1, dtype=np.int64)
    for k, name in enumerate(parts):
        labels[list(gt_masks[name].member_indices)] = k
    params, feats, pairs = oracle_decoder(labels, len(parts))
    pred_masks: list[PartMask] = []
    for entry in pred.links:
        if not entry.has_seg_marker or entry.link_name not in parts:
            continue
        probs = score_points(params, pairs[parts.index(entry.link_name)], feats)
        pred_masks.append(binarize(probs, config.threshold, entry.link_name))
    save_masks(pred_masks, dst / "masks.json")
    gt_part_masks = [gt_masks[n] for n in parts]
    seg = eval_segmentation(
        pred_masks, gt_part_masks, len(cloud), pred.articulated_part_count(), gt.articulated_part_count()
    )

    # meshes, expressed in each predicted link's rest frame
    skeleton = assemble_urdf(pred, dst / "meshes", urdf_dir=dst, allow_missing_mesh=True, name=object_id)
    rest = forward_kinematics(skeleton, {j.id: 0.0 for j in skeleton.moving_joints()}, check_limits=False)
    claimed = set()
    for m in pred_masks:
        claimed.update(m.member_indices)
    base_mask = PartMask(skeleton.root, tuple(i for i in range(len(cloud)) if i not in claimed))
    gt_world = forward_kinematics(gt, {j.id: 0.0 for j in gt.moving_joints()}, check_limits=False)
    chamfers = []
    for mask in [base_mask] + pred_masks:
        try:
            world_mesh = points_to_mesh(cloud, mask, config.mesh_method, config.alpha)
        except DegenerateGeometry as exc:
            result["errors"].append({"link": mask.part_name, **exc.to_dict()})
            continue
        save_obj(world_mesh.transformed(invert_transform(rest[mask.part_name])), dst / "meshes" / f"{mask.part_name}.obj")
        gt_name = mask.part_name if mask.part_name != skeleton.root else gt.root
        if gt_name in gt.link_names and gt.link(gt_name).visual_mesh is not None and config.cd_samples > 0:
            gt_mesh = load_obj(src / gt.link(gt_name).visual_mesh.filename).transformed(gt_world[gt_name])
            seed = zlib.crc32(f"{config.seed}:{object_id}:{gt_name}".encode())
            chamfers.append(mesh_chamfer(world_mesh, gt_mesh, config.cd_samples, seed))
    save_urdf(skeleton, dst / "model.urdf")

    verdict = check_executability(dst / "model.urdf", SweepConfig(config.samples_per_joint, config.bound_factor))
    joints = eval_joints(pred, gt, config.policy, axis_line=config.axis_line, sign_invariant=config.sign_invariant)
    result["verdict"] = verdict.to_dict()
    result["joints"] = joints.to_dict()
    result["segmentation"] = seg.to_dict()
    result["chamfer"] = float(np.mean(chamfers)) if chamfers else None
    return result


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def report_from_results(results: dict[str, dict], splits: dict[str, str]) -> EvalReport:
    verdicts = {k: ExecutabilityVerdict.from_dict(r["verdict"]) for k, r in results.items()}
    joints = {k: JointErrors.from_dict(r["joints"]) for k, r in results.items()}
    segs = {}
    for k, r in results.items():
        s = dict(r["segmentation"])
        s["pairs"] = [tuple(p) for p in s.get("pairs", [])]
        segs[k] = SegResult(**s)
    extras = {k: {"chamfer": r.get("chamfer")} for k, r in results.items()}
    return aggregate_report(verdicts, joints, segs, splits, extras)


def run_pipeline(config: PipelineConfig) -> EvalReport:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids = list_objects(config.objects_dir)
    splits_path = Path(config.splits) if config.splits else Path(config.objects_dir) / "splits.json"
    all_splits = json.loads(splits_path.read_text(encoding="utf-8")) if splits_path.is_file() else {}
    splits = {k: all_splits.get(k, "ID") for k in ids}
    if config.workers > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outputs = list(pool.map(run_object, ids, [config] * len(ids)))
    else:
        outputs = [run_object(k, config) for k in ids]
    results = {r["object"]: r for r in outputs}
    for k in sorted(results):
        _write_json(out / k / "result.json", results[k])
    report = report_from_results(results, splits)
    doc = report.to_dict()
    doc["config"] = {k: v for k, v in config.to_dict().items() if k not in ("objects_dir", "out_dir", "splits", "workers")}
    _write_json(out / "report.json", doc)
    (out / "report.txt").write_text(report.table(), encoding="utf-8")
    return report
