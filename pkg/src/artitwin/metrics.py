"""Segmentation and joint-parameter metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .articulation import ArticulationPrediction
from .errors import IndexOutOfRange, ZeroAxis
from .geometry import PartMask
from .kernels import intersection_counts
from .matching import hungarian
from .transforms import rpy_to_matrix
from .urdf import JointSpec, UrdfModel

MATCH_POLICIES = ("hungarian-origin", "by-id")


# ---------------------------------------------------------------------------
# segmentation


@dataclass
class SegResult:
    miou: float
    count_match: bool
    pairs: list[tuple[int, int]] = field(default_factory=list)
    ious: list[float] = field(default_factory=list)
    n_pred: int = 0
    n_gt: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pairs"] = [list(p) for p in self.pairs]
        return d


def _membership(masks, n: int) -> np.ndarray:
    out = np.zeros((len(masks), n), dtype=np.uint8)
    for k, m in enumerate(masks):
        if m.member_indices and (m.member_indices[-1] >= n):
            raise IndexOutOfRange(f"mask {m.part_name!r} index {m.member_indices[-1]} >= point count {n}")
        out[k, list(m.member_indices)] = 1
    return out


def iou_matrix(pred_masks, gt_masks, n: int) -> np.ndarray:
    """``iou[i, j]`` between predicted mask ``i`` and ground-truth mask ``j``."""
    a, b = _membership(pred_masks, n), _membership(gt_masks, n)
    inter = intersection_counts(a, b).astype(np.float64)
    union = a.sum(axis=1, dtype=np.int64)[:, None] + b.sum(axis=1, dtype=np.int64)[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        iou = np.where(union > 0, inter / union, 0.0)
    return iou


def eval_segmentation(
    pred_masks: list[PartMask],
    gt_masks: list[PartMask],
    n: int,
    pred_count: int | None = None,
    gt_count: int | None = None,
) -> SegResult:
    """mIoU under the IoU-maximising one-to-one matching.

    Unmatched ground-truth parts contribute zero.  ``count_match`` compares the
    articulated-part counts when given, else the mask counts.
    """
    pred_count = len(pred_masks) if pred_count is None else pred_count
    gt_count = len(gt_masks) if gt_count is None else gt_count
    count_match = pred_count == gt_count
    if not gt_masks:
        _membership(pred_masks, n)
        return SegResult(1.0 if not pred_masks else 0.0, count_match, n_pred=len(pred_masks), n_gt=0)
    iou = iou_matrix(pred_masks, gt_masks, n)
    pairs = hungarian(-iou) if len(pred_masks) else []
    ious = [float(iou[i, j]) for i, j in pairs]
    miou = sum(ious) / len(gt_masks)
    return SegResult(miou, count_match, pairs, ious, len(pred_masks), len(gt_masks))


# ---------------------------------------------------------------------------
# joints


def axis_error(a_pred, a_gt, sign_invariant: bool = False) -> float:
    """Angle between two axes in [0, pi] (or [0, pi/2] when sign-invariant)."""
    a = np.asarray(a_pred, dtype=np.float64)
    b = np.asarray(a_gt, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroAxis("axis_error needs nonzero axes")
    c = float(np.clip((a / na) @ (b / nb), -1.0, 1.0))
    theta = math.acos(c)
    return min(theta, math.pi - theta) if sign_invariant else theta


def point_line_distance(point, line_point, direction) -> float:
    d = np.asarray(direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    r = np.asarray(point, dtype=np.float64) - np.asarray(line_point, dtype=np.float64)
    return float(np.linalg.norm(r - (r @ d) * d))


def origin_error(pred: JointSpec, gt: JointSpec, axis_line: bool = False) -> float:
    if axis_line and gt.joint_type in ("revolute", "continuous") and any(gt.axis):
        direction = rpy_to_matrix(gt.origin.rpy) @ np.asarray(gt.axis, dtype=np.float64)
        return point_line_distance(pred.origin.xyz, gt.origin.xyz, direction)
    return float(np.linalg.norm(np.subtract(pred.origin.xyz, gt.origin.xyz)))


@dataclass
class Matching:
    pairs: list[tuple[int, int]]
    unmatched_pred: list[int]
    unmatched_gt: list[int]


def match_joints(pred: list[JointSpec], gt: list[JointSpec], policy: str = "hungarian-origin") -> Matching:
    if policy == "by-id":
        gt_index = {j.id: k for k, j in enumerate(gt)}
        pairs = [(k, gt_index[j.id]) for k, j in enumerate(pred) if j.id in gt_index]
    elif policy == "hungarian-origin":
        cost = np.array([[np.linalg.norm(np.subtract(p.origin.xyz, g.origin.xyz)) for g in gt] for p in pred])
        pairs = hungarian(cost.reshape(len(pred), len(gt)))
    else:
        raise ValueError(f"unknown matching policy {policy!r}")
    used_p = {p for p, _ in pairs}
    used_g = {g for _, g in pairs}
    return Matching(
        sorted(pairs),
        [k for k in range(len(pred)) if k not in used_p],
        [k for k in range(len(gt)) if k not in used_g],
    )


@dataclass
class JointErrors:
    """Aggregate joint errors for one object.

    ``type_error`` is the fraction of joints (matched or not) with a wrong or
    missing type; axis and origin means cover matched pairs only.  All three
    are ``None`` for the empty aggregate.
    """

    type_error: float | None
    axis_error: float | None
    origin_error: float | None
    n_pred: int = 0
    n_gt: int = 0
    n_matched: int = 0
    unmatched_pred: list[str] = field(default_factory=list)
    unmatched_gt: list[str] = field(default_factory=list)
    pairs: list[dict] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.type_error is None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "JointErrors":
        return cls(**d)


def _joints(obj) -> list[JointSpec]:
    return list(obj.joints)


def eval_joints(
    pred: ArticulationPrediction | UrdfModel,
    gt: UrdfModel | ArticulationPrediction,
    policy: str = "hungarian-origin",
    *,
    axis_line: bool = False,
    sign_invariant: bool = False,
) -> JointErrors:
    pj, gj = _joints(pred), _joints(gt)
    if not pj or not gj:
        return JointErrors(None, None, None, len(pj), len(gj))
    match = match_joints(pj, gj, policy)
    records = []
    for p, g in match.pairs:
        a, b = pj[p], gj[g]
        records.append(
            {
                "pred": a.id,
                "gt": b.id,
                "type_error": int(a.joint_type != b.joint_type),
                "axis_error": axis_error(a.axis, b.axis, sign_invariant) if any(a.axis) and any(b.axis) else None,
                "origin_error": origin_error(a, b, axis_line),
            }
        )
    n_unmatched = len(match.unmatched_pred) + len(match.unmatched_gt)
    type_err = (sum(r["type_error"] for r in records) + n_unmatched) / (len(records) + n_unmatched)
    axes = [r["axis_error"] for r in records if r["axis_error"] is not None]
    origins = [r["origin_error"] for r in records]
    return JointErrors(
        type_error=type_err,
        axis_error=float(np.mean(axes)) if axes else None,
        origin_error=float(np.mean(origins)) if origins else None,
        n_pred=len(pj),
        n_gt=len(gj),
        n_matched=len(records),
        unmatched_pred=[pj[k].id for k in match.unmatched_pred],
        unmatched_gt=[gj[k].id for k in match.unmatched_gt],
        pairs=records,
    )


def joint_success_rate(errors: JointErrors, axis_threshold: float, origin_threshold: float) -> float | None:
    """Fraction of ground-truth joints predicted with the right type and both
    errors within the given thresholds.  No default thresholds are assumed."""
    if errors.n_gt == 0:
        return None
    ok = sum(
        1
        for r in errors.pairs
        if r["type_error"] == 0
        and (r["axis_error"] is None or r["axis_error"] <= axis_threshold)
        and r["origin_error"] <= origin_threshold
    )
    return ok / errors.n_gt
