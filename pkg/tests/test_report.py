import json

import pytest

from artitwin.errors import KeyMismatch
from artitwin.executability import ExecutabilityVerdict
from artitwin.metrics import JointErrors, SegResult
from artitwin.report import aggregate_report


def _verdicts(categories):
    return {f"o{k}": ExecutabilityVerdict(c == "none", c) for k, c in enumerate(categories)}


def test_rate_three_of_four():
    verdicts = _verdicts(["none", "none", "motion", "none"])
    report = aggregate_report(verdicts, None, None, {k: "ID" for k in verdicts})
    assert report.splits["All"]["executability_rate"] == 0.75


def test_empty_split_is_absent():
    verdicts = _verdicts(["none", "none"])
    report = aggregate_report(verdicts, None, None, {k: "ID" for k in verdicts})
    assert report.splits["OOD"] is None
    assert json.loads(report.to_json())["splits"]["OOD"] is None
    assert "absent" in report.table()


def test_failure_breakdown():
    cats = ["parameter", "parameter", "json-format"] + ["none"] * 7
    verdicts = _verdicts(cats)
    report = aggregate_report(verdicts, None, None, {k: "ID" for k in verdicts})
    all_split = report.splits["All"]
    assert all_split["failure_breakdown"] == {"json-format": 0.1, "parameter": 0.2}
    assert all_split["overall_failure"] == pytest.approx(0.3)


def test_per_split_means():
    verdicts = _verdicts(["none", "none", "motion"])
    labels = {"o0": "ID", "o1": "ID", "o2": "OOD"}
    joints = {
        "o0": JointErrors(0.0, 0.1, 0.2, 2, 2),
        "o1": JointErrors(0.5, 0.3, 0.4, 2, 2),
        "o2": JointErrors(None, None, None, 0, 3),
    }
    segs = {"o0": SegResult(1.0, True), "o1": SegResult(0.5, False), "o2": SegResult(0.0, False)}
    extra = {"o0": {"chamfer": 1.0}, "o1": {"chamfer": 3.0}, "o2": {"chamfer": None}}
    report = aggregate_report(verdicts, joints, segs, labels, extra)
    ident = report.splits["ID"]
    assert ident["axis_error"] == pytest.approx(0.2)
    assert ident["miou"] == 0.75 and ident["count_acc"] == 0.5
    assert ident["chamfer"] == 2.0
    ood = report.splits["OOD"]
    assert ood["executability_rate"] == 0.0 and ood["axis_error"] is None
    assert report.splits["All"]["miou"] == pytest.approx(0.5)
    assert report.per_object["o0"]["chamfer"] == 1.0


def test_order_independent():
    verdicts = _verdicts(["none", "mesh", "none", "motion"])
    labels = {k: ("ID" if i % 2 else "OOD") for i, k in enumerate(verdicts)}
    a = aggregate_report(verdicts, None, None, labels)
    b = aggregate_report(dict(reversed(list(verdicts.items()))), None, None, dict(reversed(list(labels.items()))))
    assert a.to_json() == b.to_json()


def test_key_mismatch():
    verdicts = _verdicts(["none", "none"])
    with pytest.raises(KeyMismatch):
        aggregate_report(verdicts, None, None, {"o0": "ID"})
    with pytest.raises(KeyMismatch):
        aggregate_report(verdicts, {"o0": JointErrors(0, 0, 0, 1, 1)}, None, {k: "ID" for k in verdicts})
    with pytest.raises(KeyMismatch):
        aggregate_report(verdicts, None, None, {"o0": "ID", "o1": "test"})
