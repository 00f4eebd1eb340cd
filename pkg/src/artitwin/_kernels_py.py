"""NumPy implementations of the hot kernels (fallback for the compiled core)."""

import numpy as np


def coulomb_energy_grad(points):
    """Inverse-distance energy ``sum_{i<j} 1/|p_i - p_j|`` and its gradient."""
    P = np.ascontiguousarray(points, dtype=np.float64)
    diff = P[:, None, :] - P[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = len(P)
    iu = np.triu_indices(n, 1)
    energy = float(np.sum(1.0 / dist[iu]))
    np.fill_diagonal(dist, np.inf)
    grad = -np.einsum("ijk,ij->ik", diff, 1.0 / dist**3)
    return energy, grad


def intersection_counts(a, b):
    """``out[i, j] = |A_i & B_j|`` for 0/1 membership rows ``a`` (k×N) and ``b`` (m×N)."""
    A = np.ascontiguousarray(a, dtype=np.int64)
    B = np.ascontiguousarray(b, dtype=np.int64)
    return A @ B.T


def tet_circumradii(points, tets):
    P = np.asarray(points, dtype=np.float64)
    T = np.asarray(tets, dtype=np.int64)
    a = P[T[:, 0]]
    u, v, w = P[T[:, 1]] - a, P[T[:, 2]] - a, P[T[:, 3]] - a
    num = (
        np.einsum("ij,ij->i", w, w)[:, None] * np.cross(u, v)
        + np.einsum("ij,ij->i", v, v)[:, None] * np.cross(w, u)
        + np.einsum("ij,ij->i", u, u)[:, None] * np.cross(v, w)
    )
    den = 2.0 * np.einsum("ij,ij->i", u, np.cross(v, w))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.linalg.norm(num, axis=1) / np.abs(den)
    r[~np.isfinite(r)] = np.inf
    return r
