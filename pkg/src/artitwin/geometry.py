"""Point clouds, part masks, Chamfer distance, point-to-mesh conversion and OBJ I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError, cKDTree

from .errors import DegenerateGeometry, EmptyCloud, IndexOutOfRange, IoError, ParseError
from .kernels import tet_circumradii

CLOUD_FORMATS = ("xyzrgb-text", "ply-ascii")
MESH_METHODS = ("convex-hull", "alpha")


# ---------------------------------------------------------------------------
# point clouds


@dataclass(frozen=True, eq=False)
class PointCloud:
    """N×6 array: xyz in meters, rgb in [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 2 and pts.shape[1] == 3:
            pts = np.hstack([pts, np.zeros((len(pts), 3))])
        if pts.ndim != 2 or pts.shape[1] != 6:
            raise ValueError(f"point array must be N×6, got shape {pts.shape}")
        if len(pts) == 0:
            raise EmptyCloud("point cloud has no points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite values")
        pts[:, 3:] = np.clip(pts[:, 3:], 0.0, 1.0)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, PointCloud) and np.array_equal(self.points, other.points)

    @property
    def xyz(self) -> np.ndarray:
        return self.points[:, :3]

    @property
    def rgb(self) -> np.ndarray:
        return self.points[:, 3:]


def _sniff_format(path: Path) -> str:
    return "ply-ascii" if path.suffix.lower() == ".ply" else "xyzrgb-text"


def _parse_row(tokens: list[str], n: int, lineno: int, path: str) -> list[float]:
    if len(tokens) != n:
        raise ParseError(f"expected {n} values, got {len(tokens)}", path=path, line=lineno)
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"bad number in {' '.join(tokens)!r}", path=path, line=lineno) from None


def _load_xyzrgb(lines: list[str], path: str) -> list[list[float]]:
    rows = []
    for lineno, line in enumerate(lines, 1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        rows.append(_parse_row(tokens, 6, lineno, path))
    return rows


def _load_ply(lines: list[str], path: str) -> list[list[float]]:
    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", path=path, line=1)
    count, props, in_vertex, fmt_ok = None, [], False, False
    end = None
    for lineno, line in enumerate(lines[1:], 2):
        tokens = line.split()
        if not tokens:
            continue
        key = tokens[0]
        if key == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise ParseError("only ascii PLY is supported", path=path, line=lineno)
            fmt_ok = True
        elif key == "element":
            in_vertex = len(tokens) == 3 and tokens[1] == "vertex"
            if in_vertex:
                try:
                    count = int(tokens[2])
                except ValueError:
                    raise ParseError("bad vertex count", path=path, line=lineno) from None
        elif key == "property" and in_vertex:
            props.append(tokens[-1])
        elif key == "end_header":
            end = lineno
            break
    if end is None or not fmt_ok or count is None:
        raise ParseError("incomplete PLY header", path=path, line=len(lines))
    if count == 0:
        raise EmptyCloud("PLY declares zero vertices", path=path)
    try:
        cols = [props.index(c) for c in ("x", "y", "z")]
    except ValueError:
        raise ParseError("PLY vertex lacks x/y/z", path=path, line=end) from None
    color = [props.index(c) for c in ("red", "green", "blue")] if {"red", "green", "blue"} <= set(props) else None
    rows = []
    lineno = end
    for line in lines[end:]:
        lineno += 1
        if len(rows) == count:
            break
        tokens = line.split()
        if not tokens:
            continue
        vals = _parse_row(tokens[: len(props)], len(props), lineno, path)
        rgb = [0.0, 0.0, 0.0]
        if color:
            rgb = [vals[c] for c in color]
            if max(rgb) > 1.0:
                rgb = [c / 255.0 for c in rgb]
        rows.append([vals[c] for c in cols] + rgb)
    if len(rows) != count:
        raise ParseError(f"expected {count} vertices, found {len(rows)}", path=path, line=lineno)
    return rows


def load_cloud(path, format: str | None = None) -> PointCloud:
    path = Path(path)
    fmt = format or _sniff_format(path)
    if fmt not in CLOUD_FORMATS:
        raise ValueError(f"unknown cloud format {fmt!r}")
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(str(exc), path=str(path)) from None
    rows = _load_ply(lines, str(path)) if fmt == "ply-ascii" else _load_xyzrgb(lines, str(path))
    if not rows:
        raise EmptyCloud("point cloud file has no points", path=str(path))
    return PointCloud(np.array(rows))


def save_cloud(cloud: PointCloud, path) -> None:
    """Write xyzrgb text; ``repr`` floats round-trip exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in cloud.points:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


# ---------------------------------------------------------------------------
# masks


@dataclass(frozen=True)
class PartMask:
    part_name: str
    member_indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = sorted({int(i) for i in self.member_indices})
        if idx and idx[0] < 0:
            raise IndexOutOfRange(f"negative index in mask {self.part_name!r}")
        object.__setattr__(self, "member_indices", tuple(idx))

    def __len__(self) -> int:
        return len(self.member_indices)

    def check(self, n: int) -> "PartMask":
        if self.member_indices and self.member_indices[-1] >= n:
            raise IndexOutOfRange(
                f"mask {self.part_name!r} index {self.member_indices[-1]} >= point count {n}"
            )
        return self

    def as_bool(self, n: int) -> np.ndarray:
        self.check(n)
        out = np.zeros(n, dtype=bool)
        out[list(self.member_indices)] = True
        return out


def load_masks(path) -> list[PartMask]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(str(exc), path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=str(path), line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("mask file must be a JSON object", path=str(path))
    masks = []
    for name, idx in doc.items():
        if not isinstance(idx, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
            raise ParseError(f"mask {name!r} must be an array of integers", path=str(path))
        masks.append(PartMask(name, tuple(idx)))
    return masks


def save_masks(masks, path) -> None:
    doc = {m.part_name: list(m.member_indices) for m in masks}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Chamfer distance


def _xyz(c) -> np.ndarray:
    arr = c.xyz if isinstance(c, PointCloud) else np.asarray(c, dtype=np.float64)[:, :3]
    if len(arr) == 0:
        raise EmptyCloud("Chamfer distance needs nonempty point sets")
    return arr


def nearest_sq_dists(src, dst) -> np.ndarray:
    """Squared distance from each point of ``src`` to its nearest point in ``dst`` (kd-tree)."""
    a, b = _xyz(src), _xyz(dst)
    _, idx = cKDTree(b).query(a, k=1)
    # recompute from coordinates rather than squaring the tree's rooted distance
    diff = a - b[idx]
    return np.einsum("ij,ij->i", diff, diff)


def chamfer_distance(a, b) -> float:
    """Mean squared nearest-neighbour distance, summed over both directions."""
    a, b = _xyz(a), _xyz(b)
    ab = nearest_sq_dists(a, b)
    ba = nearest_sq_dists(b, a)
    return float(ab.mean() + ba.mean())


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(v)):
            raise DegenerateGeometry("mesh has non-finite vertices")
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise IndexOutOfRange("face index outside vertex range")
        if len(f) and np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise DegenerateGeometry("face with repeated vertex")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TriMesh)
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.faces, other.faces)
        )

    def edges(self) -> set[tuple[int, int]]:
        out = set()
        for a, b, c in self.faces.tolist():
            for u, w in ((a, b), (b, c), (c, a)):
                out.add((min(u, w), max(u, w)))
        return out

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges()) + len(self.faces)

    def volume(self) -> float:
        v = self.vertices
        a, b, c = v[self.faces[:, 0]], v[self.faces[:, 1]], v[self.faces[:, 2]]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    def face_areas(self) -> np.ndarray:
        v = self.vertices
        a, b, c = v[self.faces[:, 0]], v[self.faces[:, 1]], v[self.faces[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def transformed(self, T: np.ndarray) -> "TriMesh":
        v = self.vertices @ T[:3, :3].T + T[:3, 3]
        return TriMesh(v, self.faces)


def _select(cloud, mask: PartMask | None) -> np.ndarray:
    xyz = cloud.xyz if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)[:, :3]
    if mask is None:
        return xyz
    mask.check(len(xyz))
    return xyz[list(mask.member_indices)]


def _check_spread(pts: np.ndarray) -> None:
    if len(pts) < 4:
        raise DegenerateGeometry(f"need at least 4 points, got {len(pts)}")
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[0] == 0 or s[2] <= 1e-9 * s[0]:
        raise DegenerateGeometry("points are coplanar or collinear")


def _orient_outward(vertices: np.ndarray, faces: np.ndarray, inside: np.ndarray) -> np.ndarray:
    """Flip faces whose normal points towards the matching ``inside`` point."""
    a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    normal = np.cross(b - a, c - a)
    flip = np.einsum("ij,ij->i", normal, a - inside) < 0
    faces = faces.copy()
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


def _compact(points: np.ndarray, faces: np.ndarray) -> TriMesh:
    used, inverse = np.unique(faces.ravel(), return_inverse=True)
    return TriMesh(points[used], inverse.reshape(-1, 3))


def convex_hull_mesh(pts: np.ndarray) -> TriMesh:
    _check_spread(pts)
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateGeometry(f"convex hull failed: {exc}") from None
    faces = hull.simplices.astype(np.int64)
    centre = np.broadcast_to(pts[hull.vertices].mean(axis=0), (len(faces), 3))
    faces = _orient_outward(pts, faces, centre)
    return _compact(pts, faces)


def default_alpha(pts: np.ndarray) -> float:
    """Three times the median nearest-neighbour spacing."""
    d, _ = cKDTree(pts).query(pts, k=2)
    return 3.0 * float(np.median(d[:, 1]))


def alpha_shape_mesh(pts: np.ndarray, alpha: float | None = None) -> TriMesh:
    """Boundary of the union of Delaunay tetrahedra with circumradius <= alpha."""
    _check_spread(pts)
    alpha = default_alpha(pts) if alpha is None else float(alpha)
    try:
        tri = Delaunay(pts)
    except QhullError as exc:
        raise DegenerateGeometry(f"Delaunay failed: {exc}") from None
    tets = tri.simplices.astype(np.int64)
    keep = tets[tet_circumradii(pts, tets) <= alpha]
    if len(keep) == 0:
        raise DegenerateGeometry(f"alpha={alpha:g} keeps no tetrahedra")
    count: dict[tuple, int] = {}
    owner: dict[tuple, tuple[tuple[int, int, int], int]] = {}
    for tet in keep.tolist():
        for k in range(4):
            face = tuple(tet[:k] + tet[k + 1 :])
            key = tuple(sorted(face))
            count[key] = count.get(key, 0) + 1
            owner[key] = (face, tet[k])
    boundary = [owner[k] for k in sorted(count) if count[k] == 1]
    faces = np.array([f for f, _ in boundary], dtype=np.int64)
    opposite = pts[[o for _, o in boundary]]
    faces = _orient_outward(pts, faces, opposite)
    return _compact(pts, faces)


def points_to_mesh(cloud, mask: PartMask | None = None, method: str = "convex-hull", alpha: float | None = None) -> TriMesh:
    """Mesh the points selected by ``mask`` (all points when ``mask`` is None)."""
    pts = _select(cloud, mask)
    if method == "convex-hull":
        return convex_hull_mesh(pts)
    if method == "alpha":
        return alpha_shape_mesh(pts, alpha)
    raise ValueError(f"unknown meshing method {method!r}")


def save_obj(mesh: TriMesh, path) -> None:
    lines = [f"v {repr(float(x))} {repr(float(y))} {repr(float(z))}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc), path=str(path)) from None


def load_obj(path) -> TriMesh:
    """Read ``v`` and ``f`` records; polygons are fan-triangulated, other records skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc), path=str(path)) from None
    verts, faces = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "v":
            if len(tokens) < 4:
                raise ParseError("vertex needs 3 coordinates", path=str(path), line=lineno)
            verts.append(_parse_row(tokens[1:4], 3, lineno, str(path)))
        elif tokens[0] == "f":
            if len(tokens) < 4:
                raise ParseError("face needs at least 3 vertices", path=str(path), line=lineno)
            try:
                idx = [int(t.split("/")[0]) for t in tokens[1:]]
            except ValueError:
                raise ParseError("bad face index", path=str(path), line=lineno) from None
            if min(idx) < 1:
                raise ParseError("face indices are 1-based and positive", path=str(path), line=lineno)
            for k in range(1, len(idx) - 1):
                faces.append([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1])
    try:
        return TriMesh(np.array(verts, dtype=np.float64).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))
    except (IndexOutOfRange, DegenerateGeometry) as exc:
        raise ParseError(str(exc), path=str(path)) from None


def sample_surface(mesh: TriMesh, n: int = 10_000, seed: int = 0) -> np.ndarray:
    """Uniform area-weighted samples on the mesh surface."""
    areas = mesh.face_areas()
    total = areas.sum()
    if not total > 0:
        raise DegenerateGeometry("mesh has zero surface area")
    rng = np.random.default_rng(seed)
    tri = rng.choice(len(areas), size=n, p=areas / total)
    r1, r2 = rng.random(n), rng.random(n)
    s = np.sqrt(r1)
    v = mesh.vertices
    a, b, c = v[mesh.faces[tri, 0]], v[mesh.faces[tri, 1]], v[mesh.faces[tri, 2]]
    return (1 - s)[:, None] * a + (s * (1 - r2))[:, None] * b + (s * r2)[:, None] * c


def mesh_chamfer(a: TriMesh, b: TriMesh, n: int = 10_000, seed: int = 0) -> float:
    return chamfer_distance(sample_surface(a, n, seed), sample_surface(b, n, seed + 1))


def bounding_radius(points: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    return float(np.max(np.linalg.norm(points, axis=1)))
