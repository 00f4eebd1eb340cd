"""Camera viewpoint sets on a sphere: equatorial rings and minimum-energy
(Thomson) distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidCount
from .kernels import coulomb_energy_grad


@dataclass(frozen=True, eq=False)
class ViewpointSet:
    directions: np.ndarray
    radius: float = 1.0
    energy: float | None = None
    energy_trace: tuple[float, ...] = field(default=(), repr=False)

    def __len__(self) -> int:
        return len(self.directions)

    def camera_poses(self) -> list[dict]:
        """Look-at poses towards the origin; ``up`` is +z, or +x near the poles."""
        poses = []
        for d in self.directions:
            d = np.asarray(d, dtype=np.float64)
            up = np.array([0.0, 0.0, 1.0])
            if abs(d @ up) > 1.0 - 1e-9:
                up = np.array([1.0, 0.0, 0.0])
            poses.append(
                {
                    "position": [float(v) for v in self.radius * d],
                    "look_at": [0.0, 0.0, 0.0],
                    "up": [float(v) for v in up],
                }
            )
        return poses

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "energy": self.energy,
            "directions": [[float(v) for v in d] for d in self.directions],
            "cameras": self.camera_poses(),
        }


def coulomb_energy(points) -> float:
    return coulomb_energy_grad(points)[0]


def sample_equatorial(n: int, elevation: float = 0.0, radius: float = 1.0) -> ViewpointSet:
    """``n`` directions at azimuths ``2*pi*k/n`` and a fixed elevation."""
    if n < 1:
        raise InvalidCount(f"need at least one viewpoint, got {n}")
    az = 2.0 * math.pi * np.arange(n) / n
    ce, se = math.cos(elevation), math.sin(elevation)
    dirs = np.column_stack([ce * np.cos(az), ce * np.sin(az), np.full(n, se)])
    return ViewpointSet(dirs, radius)


def _normalize_rows(P: np.ndarray) -> np.ndarray:
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def minimize_energy(P: np.ndarray, max_iters: int = 10_000, tol: float = 1e-10):
    """Projected gradient descent on the sphere with step halving on ascent.

    Returns ``(points, energy, trace)`` where ``trace`` lists the energy after
    every accepted step (non-increasing).
    """
    P = _normalize_rows(np.asarray(P, dtype=np.float64))
    n = len(P)
    energy, grad = coulomb_energy_grad(P)
    trace = [energy]
    step = 1.0 / n**2
    for _ in range(max_iters):
        tangent = grad - np.einsum("ij,ij->i", grad, P)[:, None] * P
        proposal = _normalize_rows(P - step * tangent)
        moved = float(np.max(np.linalg.norm(proposal - P, axis=1)))
        if moved < tol:
            break
        e_new, g_new = coulomb_energy_grad(proposal)
        if e_new < energy:
            P, energy, grad = proposal, e_new, g_new
            trace.append(energy)
            step *= 1.2
        else:
            step *= 0.5
    return P, energy, trace


def sample_min_energy(
    n: int,
    seed: int = 0,
    max_iters: int = 10_000,
    tol: float = 1e-10,
    restarts: int = 10,
    radius: float = 1.0,
) -> ViewpointSet:
    """Near-uniform viewpoints minimising ``sum_{i<j} 1/|p_i - p_j|``.

    Each restart starts from normalised Gaussian triples drawn from
    ``default_rng([seed, restart])``; the lowest final energy wins.
    """
    if n < 2:
        raise InvalidCount(f"minimum-energy sampling needs n >= 2, got {n}")
    best = None
    for r in range(max(restarts, 1)):
        rng = np.random.default_rng([seed, r])
        P, energy, trace = minimize_energy(rng.standard_normal((n, 3)), max_iters, tol)
        if best is None or energy < best[1]:
            best = (P, energy, trace)
    P, energy, trace = best
    return ViewpointSet(P, radius, energy, tuple(trace))
