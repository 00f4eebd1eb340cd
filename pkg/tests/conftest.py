import math
from pathlib import Path

import numpy as np
import pytest

from artitwin.articulation import assemble_urdf, parse_prediction
from artitwin.fixtures import write_fixture_set
from artitwin.urdf import Inertial, JointSpec, Limit, LinkSpec, MeshRef, Pose, UrdfModel

DATA = Path(__file__).parent / "data"
FAUCET_JSON = (DATA / "faucet.json").read_text()


@pytest.fixture
def faucet_json() -> str:
    return FAUCET_JSON


@pytest.fixture
def faucet_model(tmp_path) -> UrdfModel:
    return assemble_urdf(parse_prediction(FAUCET_JSON), tmp_path, allow_missing_mesh=True, name="faucet")


@pytest.fixture(scope="session")
def fixture_set(tmp_path_factory) -> Path:
    return write_fixture_set(tmp_path_factory.mktemp("fixtures"))


def _unit(rng) -> tuple:
    v = rng.standard_normal(3)
    return tuple(float(x) for x in v / np.linalg.norm(v))


def random_model(rng, n_links: int, max_depth: int = 4, name: str = "fuzz") -> UrdfModel:
    """Random valid tree with depth <= max_depth and all joint types."""
    names = ["base"] + [f"link_{k}" for k in range(1, n_links)]
    depth = {"base": 0}
    links = []
    joints = []
    for k, lname in enumerate(names):
        visuals = tuple(
            MeshRef(f"meshes/{lname}_{v}.obj", Pose(tuple(rng.uniform(-1, 1, 3)), tuple(rng.uniform(-3, 3, 3))))
            for v in range(int(rng.integers(0, 3)))
        )
        inertial = Inertial(
            float(rng.uniform(0.1, 5)),
            tuple(float(x) for x in rng.uniform(1e-4, 1, 3)),
            tuple(float(x) for x in rng.uniform(-1e-3, 1e-3, 3)),
            Pose(tuple(rng.uniform(-1, 1, 3)), tuple(rng.uniform(-3, 3, 3))),
        )
        links.append(LinkSpec(lname, visuals, visuals[:1], inertial))
        if k == 0:
            continue
        candidates = [n for n in names[:k] if depth[n] < max_depth]
        parent = candidates[int(rng.integers(len(candidates)))]
        depth[lname] = depth[parent] + 1
        jtype = ["revolute", "prismatic", "continuous", "fixed", "floating", "planar"][int(rng.integers(6))]
        limit = None
        if jtype in ("revolute", "prismatic"):
            lo = float(rng.uniform(-2, 0))
            limit = Limit(lo, lo + float(rng.uniform(0, 3)))
        origin = Pose(tuple(float(x) for x in rng.uniform(-1, 1, 3)), tuple(float(x) for x in rng.uniform(-math.pi, math.pi, 3)))
        joints.append(JointSpec(f"joint_{k}", jtype, parent, lname, origin, _unit(rng), limit))
    perm = rng.permutation(len(joints))
    return UrdfModel(name, tuple(links), tuple(joints[i] for i in perm))


def seed_defects(obj_dir: Path, out_dir: Path) -> dict[str, Path]:
    """Copies of ``obj_dir/model.urdf`` with one seeded defect per failure category.

    The copies live next to the original meshes so only the injected defect
    differs from the clean model.  ``"none"`` maps to the clean file.
    """
    import xml.etree.ElementTree as ET

    clean = obj_dir / "model.urdf"
    text = clean.read_text()
    out: dict[str, Path] = {"none": clean}

    def write(category: str, body: str) -> None:
        path = obj_dir / f"defect_{category}.urdf"
        path.write_text(body)
        out[category] = path

    def edit(fn) -> str:
        root = ET.fromstring(text)
        fn(root)
        return ET.tostring(root, encoding="unicode")

    def moving_joint(root):
        return next(j for j in root.iter("joint") if j.get("type") == "revolute")

    write("json-format", text[: len(text) // 2])
    write("tree-structure", edit(lambda r: r.append(ET.Element("link", name="orphan"))))
    write("parameter", edit(lambda r: moving_joint(r).remove(moving_joint(r).find("limit"))))
    write(
        "mesh",
        edit(lambda r: next(r.iter("mesh")).set("filename", "meshes/not_there.obj")),
    )
    write("motion", edit(lambda r: moving_joint(r).find("origin").set("xyz", "1000000 0 0")))
    return out
