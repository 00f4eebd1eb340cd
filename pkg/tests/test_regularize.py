
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artitwin.errors import SchemaViolation
from artitwin.regularize import filter_by_part_count, max_pose_deviation, regularize
from artitwin.transforms import pose_to_transform
from artitwin.urdf import (
    JointSpec,
    Limit,
    LinkSpec,
    MeshRef,
    Pose,
    UrdfModel,
    emit_urdf,
    parse_urdf,
)

from conftest import random_model

pytestmark = pytest.mark.filterwarnings("ignore::artitwin.urdf.UnsupportedMotionWarning")


def _chain():
    o1 = Pose((0.1, 0.2, 0.3), (0.3, -0.2, 0.9))
    o2 = Pose((0.0, 0.5, -0.1), (1.2, 0.4, -0.7))
    links = (LinkSpec("base"), LinkSpec("A"), LinkSpec("B"))
    joints = (
        JointSpec("j1", "revolute", "base", "A", o1, (0.0, 0.0, 1.0), Limit(-1.0, 1.0)),
        JointSpec("j2", "prismatic", "A", "B", o2, (1.0, 0.0, 0.0), Limit(0.0, 0.4)),
    )
    return UrdfModel("chain", links, joints), o1, o2


def test_flat_model_is_fixed_point(faucet_model):
    out, report = regularize(faucet_model)
    assert out == faucet_model
    assert report.reparented_joints == []
    assert report.consolidated_links == []


def test_serial_chain_origin_is_product():
    model, o1, o2 = _chain()
    out, report = regularize(model)
    assert report.reparented_joints == ["j2"]
    j2 = out.joint("j2")
    assert j2.parent == "base"
    expected = pose_to_transform(o1.xyz, o1.rpy) @ pose_to_transform(o2.xyz, o2.rpy)
    np.testing.assert_allclose(j2.origin.matrix(), expected, atol=1e-12)
    assert max_pose_deviation(model, out) < 1e-9


def test_multi_mesh_link_consolidated():
    first = MeshRef("a.obj", Pose((1.0, 0.0, 0.0), (0.0, 0.0, 0.5)))
    link = LinkSpec("base", (first, MeshRef("b.obj")), (first, MeshRef("b.obj")))
    out, report = regularize(UrdfModel("m", (link,)))
    assert out.links[0].visuals == (first,)
    assert out.links[0].collisions == (first,)
    assert report.consolidated_links == [("base", 2)]


def test_root_renamed_to_base():
    model = UrdfModel(
        "m",
        (LinkSpec("body"), LinkSpec("door")),
        (JointSpec("j", "continuous", "body", "door", axis=(0.0, 0.0, 1.0)),),
    )
    out, report = regularize(model)
    assert out.root == "base"
    assert report.renamed_root == "body"
    assert out.joint("j").parent == "base"


def test_rename_collision_rejected():
    model = UrdfModel(
        "m",
        (LinkSpec("body"), LinkSpec("base")),
        (JointSpec("j", "fixed", "body", "base"),),
    )
    with pytest.raises(SchemaViolation):
        regularize(model)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_pose_preservation_and_counts(seed, n):
    model = random_model(np.random.default_rng(seed), n)
    out, report = regularize(model)
    assert max_pose_deviation(model, out) < 1e-9
    assert len(out.links) == len(model.links)
    assert len(out.joints) == len(model.joints)
    assert [j.joint_type for j in out.joints] == [j.joint_type for j in model.joints]
    assert [j.axis for j in out.joints] == [j.axis for j in model.joints]
    assert [j.limit for j in out.joints] == [j.limit for j in model.joints]
    assert all(j.parent == "base" for j in out.joints)
    for jid in report.reparented_joints:
        assert out.joint(jid).parent == report.base_link
    # output survives emit/parse
    assert parse_urdf(emit_urdf(out)) == out


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_idempotence(seed, n):
    once, _ = regularize(random_model(np.random.default_rng(seed), n))
    twice, report = regularize(once)
    assert report.reparented_joints == []
    for a, b in zip(once.joints, twice.joints):
        np.testing.assert_allclose(a.origin.xyz, b.origin.xyz, atol=1e-12)
        np.testing.assert_allclose(a.origin.rpy, b.origin.rpy, atol=1e-12)


def test_filter_by_part_count(faucet_model):
    assert filter_by_part_count([faucet_model], 8) == [faucet_model]
    assert filter_by_part_count([faucet_model], 3) == []
    assert filter_by_part_count([], 8) == []
    links = (LinkSpec("base"),) + tuple(LinkSpec(f"l{k}") for k in range(8))
    joints = tuple(JointSpec(f"j{k}", "continuous", "base", f"l{k}", axis=(0.0, 0.0, 1.0)) for k in range(8))
    eight = UrdfModel("eight", links, joints)
    assert eight.articulated_part_count() == 8
    assert filter_by_part_count([eight], 8) == []
    assert filter_by_part_count([eight], 9) == [eight]
    with pytest.raises(ValueError):
        filter_by_part_count([eight], 0)
