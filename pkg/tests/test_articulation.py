import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artitwin.articulation import (
    REPAIR_LIMIT,
    LinkEntry,
    NoiseSpec,
    assemble_urdf,
    mock_predict,
    parse_prediction,
    serialize_prediction,
    tilt_axis,
)
from artitwin.errors import ConsistencyViolation, JsonSyntax, MissingMesh, SchemaViolation, TreeViolation
from artitwin.metrics import eval_joints
from artitwin.regularize import regularize
from artitwin.urdf import UnsupportedMotionWarning, forward_kinematics, zero_configuration

from conftest import random_model


def _edit(text: str, fn) -> str:
    obj = json.loads(text)
    fn(obj)
    return json.dumps(obj)


def test_faucet_prediction(faucet_json):
    pred = parse_prediction(faucet_json)
    assert len(pred.joints) == 4
    assert len(pred.links) == 4
    assert all(l.has_seg_marker for l in pred.links)
    assert [l.category for l in pred.links] == ["switch", "switch", "spout", "faucet_base"]
    assert pred.joints[1].limit.lower == 0.0


def test_empty_prediction_is_valid():
    pred = parse_prediction('{"joints": [], "links": {}}')
    assert pred.joints == () and pred.links == ()


def test_wrong_axis_arity_names_joint(faucet_json):
    text = _edit(faucet_json, lambda o: o["joints"][2].__setitem__("axis", [0.0, 1.0]))
    with pytest.raises(SchemaViolation) as info:
        parse_prediction(text)
    assert "joint_2" in info.value.path
    assert info.value.path.endswith(".axis")


@pytest.mark.parametrize(
    "mutate, error, path_part",
    [
        (lambda o: o["joints"][0].pop("child"), SchemaViolation, "$.joints[0]"),
        (lambda o: o["joints"][1].__setitem__("type", "hinge"), SchemaViolation, ".type"),
        (lambda o: o["joints"][0]["origin"].__setitem__("rpy", [0, 0]), SchemaViolation, ".origin.rpy"),
        (lambda o: o["joints"][3].__setitem__("child", "link_9"), ConsistencyViolation, "$.joints[3]"),
        (lambda o: o["joints"][0].pop("limit"), SchemaViolation, ".limit"),
        (lambda o: o["links"].__setitem__("link_0", "switch[SEG][SEG]"), SchemaViolation, "$.links"),
        (lambda o: o.pop("links"), SchemaViolation, "$"),
    ],
    ids=["missing-child", "bad-type", "rpy-arity", "undeclared-link", "missing-limit", "double-seg", "no-links"],
)
def test_errors_carry_json_path(faucet_json, mutate, error, path_part):
    with pytest.raises(error) as info:
        parse_prediction(_edit(faucet_json, mutate))
    assert path_part in info.value.path


def test_json_syntax_error():
    with pytest.raises(JsonSyntax):
        parse_prediction('{"joints": [')


def test_duplicate_link_key(faucet_json):
    text = faucet_json.replace('"link_1": ', '"link_0": ')
    with pytest.raises(ConsistencyViolation):
        parse_prediction(text)


def test_repair_fills_missing_revolute_limit(faucet_json):
    text = _edit(faucet_json, lambda o: o["joints"][0].pop("limit"))
    pred = parse_prediction(text, repair=True)
    assert pred.joints[0].limit == REPAIR_LIMIT
    assert REPAIR_LIMIT.upper == pytest.approx(math.pi / 2)
    assert any("repaired" in w for w in pred.warnings)


def test_integers_accepted_for_reals():
    text = '{"joints": [{"id": "j", "type": "prismatic", "parent": "base", "child": "a", "origin": {"xyz": [0, 0, 1], "rpy": [0, 0, 0]}, "axis": [0, 0, 1], "limit": {"lower": 0, "upper": 1}}], "links": {"a": "drawer[SEG]"}}'
    pred = parse_prediction(text)
    assert pred.joints[0].origin.xyz == (0.0, 0.0, 1.0)


def test_link_without_marker():
    pred = parse_prediction('{"joints": [], "links": {"a": "door"}}')
    assert pred.links[0] == LinkEntry("a", "door", False)
    assert pred.links[0].raw == "door"


def test_require_base_flag(faucet_json):
    with pytest.raises(ConsistencyViolation):
        parse_prediction(faucet_json, require_base=True)


def test_serialize_round_trip_and_key_order(faucet_json):
    pred = parse_prediction(faucet_json)
    text = serialize_prediction(pred)
    assert parse_prediction(text) == pred
    obj = json.loads(text)
    assert list(obj) == ["joints", "links"]
    assert list(obj["joints"][0]) == ["id", "type", "parent", "child", "origin", "axis", "limit"]
    assert obj["links"]["link_0"] == "switch[SEG]"
    assert json.loads(faucet_json) == obj


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9))
def test_serialize_round_trip_property(seed, n):
    rng = np.random.default_rng(seed)
    pred = mock_predict(random_model(rng, n), seed=seed)
    assert parse_prediction(serialize_prediction(pred)) == pred


def test_assemble_faucet(tmp_path, faucet_json):
    pred = parse_prediction(faucet_json)
    for name in ["base"] + pred.link_names:
        (tmp_path / f"{name}.obj").write_text("v 0 0 0\n")
    model = assemble_urdf(pred, tmp_path, urdf_dir=tmp_path)
    assert model.root == "base"
    assert model.link_names == ["base", "link_0", "link_1", "link_2", "link_3"]
    assert model.link("link_0").visual_mesh.filename == "link_0.obj"
    assert model.link("link_0").inertial.mass == 1.0
    assert model.joints == pred.joints


def test_assemble_missing_mesh(tmp_path, faucet_json):
    with pytest.raises(MissingMesh):
        assemble_urdf(parse_prediction(faucet_json), tmp_path)


def test_assemble_disconnected_link(tmp_path):
    pred = parse_prediction('{"joints": [], "links": {"a": "door[SEG]"}}')
    with pytest.raises(TreeViolation):
        assemble_urdf(pred, tmp_path, allow_missing_mesh=True)


# --- mock predictor -----------------------------------------------------------


def test_zero_noise_is_identity(faucet_model, tmp_path):
    pred = mock_predict(faucet_model, NoiseSpec(), seed=3)
    assert pred.joints == faucet_model.joints
    again = assemble_urdf(pred, tmp_path, allow_missing_mesh=True, name="faucet")
    assert again.joints == faucet_model.joints
    assert again.link_names == faucet_model.link_names


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_zero_noise_fk_identity(seed, n):
    gt = random_model(np.random.default_rng(seed), n)
    pred = mock_predict(gt, NoiseSpec(), seed=seed)
    model = assemble_urdf(pred, ".", allow_missing_mesh=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupportedMotionWarning)
        wa = forward_kinematics(gt, zero_configuration(gt), check_limits=False)
        wb = forward_kinematics(model, zero_configuration(model), check_limits=False)
    assert set(wa) == set(wb)
    for k in wa:
        np.testing.assert_array_equal(wa[k], wb[k])


def test_deterministic_for_seed(faucet_model):
    noise = NoiseSpec(0.05, 0.01, 0.3, 0.2)
    assert mock_predict(faucet_model, noise, 11) == mock_predict(faucet_model, noise, 11)
    assert mock_predict(faucet_model, noise, 11) != mock_predict(faucet_model, noise, 12)


@pytest.mark.parametrize("seed", range(5))
def test_axis_tilt_error_is_exact(faucet_model, seed):
    pred = mock_predict(faucet_model, NoiseSpec(axis_tilt_rad=0.1), seed)
    errors = eval_joints(pred, faucet_model)
    assert errors.axis_error == pytest.approx(0.1, abs=1e-9)
    for rec in errors.pairs:
        assert rec["axis_error"] == pytest.approx(0.1, abs=1e-9)


def test_full_type_flip(faucet_model):
    pred = mock_predict(faucet_model, NoiseSpec(type_flip_prob=1.0), 0)
    assert eval_joints(pred, faucet_model).type_error == 1.0


def test_origin_noise_is_isotropic_gaussian(faucet_model):
    sigma = 0.02
    offsets = []
    for seed in range(400):
        pred = mock_predict(faucet_model, NoiseSpec(origin_sigma_m=sigma), seed)
        for p, g in zip(pred.joints, faucet_model.joints):
            offsets.append(np.subtract(p.origin.xyz, g.origin.xyz))
    offsets = np.array(offsets)
    assert np.all(np.abs(offsets.mean(axis=0)) < 0.1 * sigma)
    np.testing.assert_allclose(offsets.std(axis=0), sigma, rtol=0.08)


def test_drop_all_parts(faucet_model):
    pred = mock_predict(faucet_model, NoiseSpec(drop_part_prob=1.0), 0)
    assert pred.joints == () and pred.links == ()


def test_drop_reparents_orphans(fixture_set):
    from artitwin.fixtures import build_model, cabinet

    gt, _ = regularize(build_model(cabinet()))
    nested = build_model(cabinet())
    for seed in range(50):
        pred = mock_predict(nested, NoiseSpec(drop_part_prob=0.5), seed)
        assemble_urdf(pred, ".", allow_missing_mesh=True)  # still a valid tree
        dropped = set(nested.link_names) - set(pred.link_names) - {nested.root}
        assert all(j.parent not in dropped for j in pred.joints)
    assert gt.root == "base"


@settings(max_examples=100)
@given(
    st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.floats(0, 1.5),
)
def test_tilt_angle_exact(axis, direction, angle):
    out = np.array(tilt_axis(axis, angle, direction))
    a = np.asarray(axis) / np.linalg.norm(axis)
    assert np.linalg.norm(out) == pytest.approx(1.0)
    assert math.acos(np.clip(out @ a, -1, 1)) == pytest.approx(angle, abs=1e-7)


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(type_flip_prob=1.5)
    with pytest.raises(ValueError):
        NoiseSpec(axis_tilt_rad=-0.1)
    assert NoiseSpec.from_dict(NoiseSpec(0.1, 0.2, 0.3, 0.4).to_dict()) == NoiseSpec(0.1, 0.2, 0.3, 0.4)
