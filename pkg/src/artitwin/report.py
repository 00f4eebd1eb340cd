"""Aggregate per-object results into split-level metrics (All / ID / OOD)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .errors import KeyMismatch
from .executability import ExecutabilityVerdict
from .metrics import JointErrors, SegResult

SPLITS = ("All", "ID", "OOD")


@dataclass
class EvalReport:
    objects: list[str]
    splits: dict[str, dict | None]
    per_object: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"objects": self.objects, "splits": self.splits, "per_object": self.per_object}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        cols = [
            ("exec", "executability_rate"),
            ("mIoU", "miou"),
            ("count", "count_acc"),
            ("type", "type_error"),
            ("axis", "axis_error"),
            ("origin", "origin_error"),
        ]
        head = f"{'split':<6}{'n':>5}" + "".join(f"{c:>10}" for c, _ in cols)
        lines = [head, "-" * len(head)]
        for split in SPLITS:
            s = self.splits.get(split)
            if s is None:
                lines.append(f"{split:<6}{'-':>5}" + "".join(f"{'absent':>10}" for _ in cols))
                continue
            cells = "".join(f"{'-':>10}" if s[k] is None else f"{s[k]:>10.4f}" for _, k in cols)
            lines.append(f"{split:<6}{s['n_objects']:>5}{cells}")
        all_split = self.splits.get("All") or {}
        breakdown = all_split.get("failure_breakdown") or {}
        if breakdown:
            lines.append("")
            lines.append("failures: " + ", ".join(f"{k} {v:.1%}" for k, v in sorted(breakdown.items())))
        return "\n".join(lines) + "\n"


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _split_metrics(ids, verdicts, joints, segs) -> dict:
    n = len(ids)
    passed = sum(1 for k in ids if verdicts[k].passed)
    counts: dict[str, int] = {}
    for k in ids:
        cat = verdicts[k].failure_category
        if cat != "none":
            counts[cat] = counts.get(cat, 0) + 1
    out = {
        "n_objects": n,
        "executability_rate": passed / n,
        "failure_breakdown": {c: counts[c] / n for c in sorted(counts)},
        "overall_failure": (n - passed) / n,
        "miou": None,
        "count_acc": None,
        "type_error": None,
        "axis_error": None,
        "origin_error": None,
    }
    if segs is not None:
        out["miou"] = _mean(segs[k].miou for k in ids)
        out["count_acc"] = _mean(float(segs[k].count_match) for k in ids)
    if joints is not None:
        out["type_error"] = _mean(joints[k].type_error for k in ids)
        out["axis_error"] = _mean(joints[k].axis_error for k in ids)
        out["origin_error"] = _mean(joints[k].origin_error for k in ids)
    return out


def aggregate_report(
    verdicts: Mapping[str, ExecutabilityVerdict],
    joint_errors: Mapping[str, JointErrors] | None,
    seg_results: Mapping[str, SegResult] | None,
    split_labels: Mapping[str, str],
    extra_metrics: Mapping[str, Mapping[str, float | None]] | None = None,
) -> EvalReport:
    """Per-split means of every metric; a split with no objects is ``None``.

    ``extra_metrics`` maps object id to additional scalar metrics (e.g. shape
    Chamfer distance) that are averaged per split like the built-in ones.
    """
    keys = set(verdicts)
    checked = (
        ("joint_errors", joint_errors),
        ("seg_results", seg_results),
        ("split_labels", split_labels),
        ("extra_metrics", extra_metrics),
    )
    for name, mapping in checked:
        if mapping is not None and set(mapping) != keys:
            diff = sorted(set(mapping) ^ keys)
            raise KeyMismatch(f"{name} keys differ from verdict keys: {diff}")
    bad = sorted(k for k, v in split_labels.items() if v not in ("ID", "OOD"))
    if bad:
        raise KeyMismatch(f"split labels must be ID or OOD: {bad}")
    ids = sorted(keys)
    splits: dict[str, dict | None] = {}
    for split in SPLITS:
        members = ids if split == "All" else [k for k in ids if split_labels[k] == split]
        if not members:
            splits[split] = None
            continue
        splits[split] = _split_metrics(members, verdicts, joint_errors, seg_results)
        if extra_metrics is not None:
            names = sorted({m for k in members for m in extra_metrics[k]})
            for m in names:
                splits[split][m] = _mean(extra_metrics[k].get(m) for k in members)
    per_object = {}
    for k in ids:
        per_object[k] = {
            "split": split_labels[k],
            "executability": verdicts[k].to_dict(),
            "joints": joint_errors[k].to_dict() if joint_errors is not None else None,
            "segmentation": seg_results[k].to_dict() if seg_results is not None else None,
        }
        if extra_metrics is not None:
            per_object[k].update(extra_metrics[k])
    return EvalReport(ids, splits, per_object)
