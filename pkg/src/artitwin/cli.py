"""Command-line entry point: ``artitwin <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .articulation import assemble_urdf, load_prediction
from .errors import (
    ArtitwinError,
    ConsistencyViolation,
    DegenerateGeometry,
    IoError,
    JsonSyntax,
    MissingMesh,
    SchemaViolation,
    TreeViolation,
    XmlSyntax,
)
from .executability import SweepConfig, check_executability
from .geometry import load_cloud, load_masks, points_to_mesh, save_obj
from .metrics import eval_joints, eval_segmentation, joint_success_rate
from .pipeline import PipelineConfig, default_workers, report_from_results, run_pipeline
from .regularize import filter_by_part_count, regularize
from .urdf import MeshRef, UrdfModel, load_urdf, save_urdf
from .viewsampler import sample_equatorial, sample_min_energy

EXIT_FORMAT, EXIT_CONSISTENCY, EXIT_IO = 1, 2, 3


class Output:
    def __init__(self, args):
        self.json = getattr(args, "json", False)
        self.quiet = getattr(args, "quiet", False)
        self.out = getattr(args, "out", None)

    def emit(self, doc, text: str | None = None, to_file: bool = True) -> None:
        payload = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if to_file and self.out:
            Path(self.out).parent.mkdir(parents=True, exist_ok=True)
            Path(self.out).write_text(payload, encoding="utf-8")
        if self.quiet:
            return
        if self.json or text is None:
            sys.stdout.write(payload)
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _error(exc: ArtitwinError | Exception, code: int) -> int:
    doc = exc.to_dict() if isinstance(exc, ArtitwinError) else {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(doc) + "\n")
    return code


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (JsonSyntax, SchemaViolation, XmlSyntax)):
        return EXIT_FORMAT
    if isinstance(exc, (ConsistencyViolation, TreeViolation)):
        return EXIT_CONSISTENCY
    if isinstance(exc, (MissingMesh, IoError, OSError)):
        return EXIT_IO
    return EXIT_FORMAT


# ---------------------------------------------------------------------------
# subcommands


def _find_urdf(obj_dir: Path) -> Path | None:
    for preferred in ("mobility.urdf", "model.urdf"):
        if (obj_dir / preferred).is_file():
            return obj_dir / preferred
    found = sorted(obj_dir.glob("*.urdf"))
    return found[0] if found else None


def _rebase_meshes(model: UrdfModel, src_dir: Path, dst_dir: Path) -> UrdfModel:
    from dataclasses import replace

    def fix(ref: MeshRef) -> MeshRef:
        p = Path(ref.filename)
        if p.is_absolute() or "://" in ref.filename:
            return ref
        return replace(ref, filename=Path(os.path.relpath((src_dir / p).resolve(), dst_dir.resolve())).as_posix())

    links = tuple(replace(l, visuals=tuple(map(fix, l.visuals)), collisions=tuple(map(fix, l.collisions))) for l in model.links)
    return replace(model, links=links)


def cmd_regularize(args) -> int:
    out = Output(args)
    src_root, dst_root = Path(args.in_dir), Path(args.out_dir)
    if src_root.resolve() == dst_root.resolve():
        return _error(ValueError("--in and --out must differ"), EXIT_IO)
    summary = {"kept": [], "filtered": [], "failed": {}}
    for obj_dir in sorted(p for p in src_root.iterdir() if p.is_dir()):
        urdf_path = _find_urdf(obj_dir)
        if urdf_path is None:
            continue
        try:
            model = load_urdf(urdf_path)
            if not filter_by_part_count([model], args.max_parts):
                summary["filtered"].append(obj_dir.name)
                continue
            reg, report = regularize(model)
        except ArtitwinError as exc:
            summary["failed"][obj_dir.name] = exc.to_dict()
            continue
        dst = dst_root / obj_dir.name
        dst.mkdir(parents=True, exist_ok=True)
        save_urdf(_rebase_meshes(reg, obj_dir, dst), dst / urdf_path.name)
        (dst / "regularization.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        summary["kept"].append(obj_dir.name)
    dst_root.mkdir(parents=True, exist_ok=True)
    (dst_root / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    text = f"regularized {len(summary['kept'])}, filtered {len(summary['filtered'])}, failed {len(summary['failed'])}"
    out.emit(summary, text, to_file=False)
    return 0 if not summary["failed"] else 1


def cmd_convert(args) -> int:
    out = Output(args)
    try:
        pred = load_prediction(args.pred, repair=args.repair, require_base=args.require_base)
        dst = Path(args.out)
        model = assemble_urdf(
            pred, args.mesh_dir, urdf_dir=dst.parent, allow_missing_mesh=args.allow_missing_mesh, name=dst.stem
        )
        dst.parent.mkdir(parents=True, exist_ok=True)
        save_urdf(model, dst)
    except FileNotFoundError as exc:
        return _error(IoError(str(exc)), EXIT_IO)
    except (ArtitwinError, OSError) as exc:
        return _error(exc, _exit_code(exc))
    doc = {"urdf": str(dst), "links": len(model.links), "joints": len(model.joints), "warnings": list(model.warnings)}
    out.out = None
    out.emit(doc, f"wrote {dst} ({len(model.links)} links, {len(model.joints)} joints)")
    return 0


def cmd_mesh(args) -> int:
    out = Output(args)
    try:
        cloud = load_cloud(args.cloud)
        masks = load_masks(args.masks)
    except ArtitwinError as exc:
        return _error(exc, _exit_code(exc))
    dst = Path(args.out_dir)
    dst.mkdir(parents=True, exist_ok=True)
    doc = {"meshes": {}, "failed": {}}
    for mask in masks:
        try:
            mesh = points_to_mesh(cloud, mask, args.method, args.alpha)
        except (DegenerateGeometry, ArtitwinError) as exc:
            doc["failed"][mask.part_name] = str(exc)
            continue
        path = dst / f"{mask.part_name}.obj"
        save_obj(mesh, path)
        doc["meshes"][mask.part_name] = {"path": str(path), "vertices": len(mesh.vertices), "faces": len(mesh.faces)}
    out.out = None
    out.emit(doc, f"meshed {len(doc['meshes'])} parts, {len(doc['failed'])} failed")
    return 0 if not doc["failed"] else 1


def cmd_sample_views(args) -> int:
    out = Output(args)
    try:
        if args.mode == "equator":
            views = sample_equatorial(args.n, args.elevation, args.radius)
        else:
            views = sample_min_energy(args.n, args.seed, args.max_iters, args.tol, args.restarts, args.radius)
    except ArtitwinError as exc:
        return _error(exc, EXIT_FORMAT)
    doc = {"mode": args.mode, **views.to_dict()}
    out.emit(doc)
    return 0


def cmd_eval_joints(args) -> int:
    out = Output(args)
    if (args.success_axis is None) != (args.success_origin is None):
        return _error(ValueError("--success-axis and --success-origin must be given together"), EXIT_FORMAT)
    try:
        pred = load_prediction(args.pred, repair=args.repair)
        gt = load_urdf(args.gt)
    except (ArtitwinError, OSError) as exc:
        return _error(exc, _exit_code(exc))
    errors = eval_joints(pred, gt, args.policy, axis_line=args.axis_line, sign_invariant=args.sign_invariant)
    doc = errors.to_dict()
    if args.success_axis is not None:
        doc["success_rate"] = joint_success_rate(errors, args.success_axis, args.success_origin)
        doc["success_thresholds"] = {"axis": args.success_axis, "origin": args.success_origin}
    out.emit(doc)
    return 0


def cmd_eval_seg(args) -> int:
    out = Output(args)
    try:
        cloud = load_cloud(args.points)
        pred = load_masks(args.pred)
        gt = load_masks(args.gt)
        res = eval_segmentation(pred, gt, len(cloud))
    except ArtitwinError as exc:
        return _error(exc, _exit_code(exc))
    out.emit(res.to_dict())
    return 0


def cmd_execute(args) -> int:
    out = Output(args)
    try:
        verdict = check_executability(args.urdf, SweepConfig(args.samples, args.bound))
    except IoError as exc:
        return _error(exc, EXIT_IO)
    out.emit(verdict.to_dict())
    return 0 if verdict.passed else 1


def _noise_overrides(args) -> dict:
    keys = ("axis_tilt_rad", "origin_sigma_m", "type_flip_prob", "drop_part_prob")
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def cmd_pipeline(args) -> int:
    out = Output(args)
    base = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    overrides = {
        "objects_dir": args.objects,
        "out_dir": args.out_dir,
        "splits": args.splits,
        "seed": args.seed,
        "policy": args.policy,
        "mesh_method": args.method,
        "workers": args.workers,
    }
    cfg = dict(base)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if args.axis_line:
        cfg["axis_line"] = True
    if args.sign_invariant:
        cfg["sign_invariant"] = True
    noise = dict(cfg.get("noise") or {})
    noise.update(_noise_overrides(args))
    cfg["noise"] = noise
    cfg.setdefault("workers", default_workers())
    try:
        config = PipelineConfig.from_dict(cfg)
        report = run_pipeline(config)
    except (ValueError, OSError) as exc:
        return _error(exc, EXIT_IO)
    out.emit(report.to_dict(), report.table())
    return 0


def cmd_report(args) -> int:
    out = Output(args)
    root = Path(args.dir)
    results = {}
    for path in sorted(root.glob("*/result.json")):
        r = json.loads(path.read_text(encoding="utf-8"))
        results[r.get("object", path.parent.name)] = r
    splits = json.loads(Path(args.splits).read_text(encoding="utf-8")) if args.splits else {}
    splits = {k: splits.get(k, "ID") for k in results}
    try:
        report = report_from_results(results, splits)
    except ArtitwinError as exc:
        return _error(exc, EXIT_CONSISTENCY)
    out.emit(report.to_dict(), report.table())
    return 0


def cmd_make_fixtures(args) -> int:
    from .fixtures import write_fixture_set

    out = Output(args)
    root = write_fixture_set(args.out_dir, points_per_part=args.points_per_part, seed=args.seed)
    out.emit({"fixtures": str(root)}, f"wrote fixture set to {root}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, out: bool = True) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
    p.add_argument("--quiet", action="store_true", help="suppress stdout")
    if out:
        p.add_argument("--out", help="also write the JSON result to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artitwin", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("regularize", help="flatten URDF trees onto a single base link")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--max-parts", type=int, default=8, help="keep objects with fewer articulated parts")
    _common(p, out=False)
    p.set_defaults(func=cmd_regularize)

    p = sub.add_parser("convert", help="articulation JSON + meshes -> URDF")
    p.add_argument("--pred", required=True)
    p.add_argument("--mesh-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--allow-missing-mesh", action="store_true")
    p.add_argument("--repair", action="store_true", help="fill missing revolute limits with [0, pi/2]")
    p.add_argument("--require-base", action="store_true", help="demand an explicit 'base' link entry")
    _common(p, out=False)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("mesh", help="mesh masked point-cloud parts to OBJ")
    p.add_argument("--cloud", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--method", choices=("convex-hull", "alpha"), default="convex-hull")
    p.add_argument("--alpha", type=float, default=None)
    _common(p, out=False)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("sample-views", help="camera viewpoints on a sphere")
    p.add_argument("--mode", choices=("sphere", "equator"), default="sphere")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--elevation", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    _common(p)
    p.set_defaults(func=cmd_sample_views)

    p = sub.add_parser("eval-joints", help="joint type/axis/origin errors")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--policy", choices=("hungarian-origin", "by-id"), default="hungarian-origin")
    p.add_argument("--axis-line", action="store_true", help="origin error as distance to the GT axis line")
    p.add_argument("--sign-invariant", action="store_true")
    p.add_argument("--repair", action="store_true")
    p.add_argument("--success-axis", type=float, default=None, help="axis threshold (rad) for success rate")
    p.add_argument("--success-origin", type=float, default=None, help="origin threshold (m) for success rate")
    _common(p)
    p.set_defaults(func=cmd_eval_joints)

    p = sub.add_parser("eval-seg", help="mIoU and count accuracy of part masks")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--points", required=True)
    _common(p)
    p.set_defaults(func=cmd_eval_seg)

    p = sub.add_parser("execute", help="physical-executability check of a URDF")
    p.add_argument("--urdf", required=True)
    p.add_argument("--samples", type=int, default=11)
    p.add_argument("--bound", type=float, default=10.0)
    _common(p)
    p.set_defaults(func=cmd_execute)

    p = sub.add_parser("pipeline", help="end-to-end batch run with the mock predictor")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--objects")
    p.add_argument("--out-dir")
    p.add_argument("--splits")
    p.add_argument("--seed", type=int)
    p.add_argument("--policy", choices=("hungarian-origin", "by-id"))
    p.add_argument("--method", choices=("convex-hull", "alpha"))
    p.add_argument("--workers", type=int)
    p.add_argument("--axis-line", action="store_true")
    p.add_argument("--sign-invariant", action="store_true")
    p.add_argument("--axis-tilt", dest="axis_tilt_rad", type=float)
    p.add_argument("--origin-sigma", dest="origin_sigma_m", type=float)
    p.add_argument("--type-flip", dest="type_flip_prob", type=float)
    p.add_argument("--drop-part", dest="drop_part_prob", type=float)
    _common(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="aggregate per-object results")
    p.add_argument("--dir", required=True)
    p.add_argument("--splits")
    _common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("make-fixtures", help="write the synthetic fixture set")
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--points-per-part", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    _common(p, out=False)
    p.set_defaults(func=cmd_make_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
