"""Minimum-cost one-to-one assignment (Hungarian / Kuhn-Munkres)."""

from __future__ import annotations

import numpy as np


def hungarian(cost) -> list[tuple[int, int]]:
    """Optimal assignment for a rectangular cost matrix.

    Returns ``min(rows, cols)`` ``(row, col)`` pairs sorted by row.  Uses the
    shortest-augmenting-path formulation with dual potentials, O(n^2 m).
    Ties are broken towards the lowest column index in each scan, so results
    are deterministic.
    """
    a = np.asarray(cost, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("cost must be a matrix")
    n, m = a.shape
    if n == 0 or m == 0:
        return []
    if not np.all(np.isfinite(a)):
        raise ValueError("cost matrix must be finite")
    if n > m:
        return sorted((r, c) for c, r in hungarian(a.T))

    # 1-based arrays; column 0 is the virtual source
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=np.int64)
    way = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            cur = a[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1  # argmin returns the first minimum
            delta = cand[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    return sorted((int(owner[j]) - 1, j - 1) for j in range(1, m + 1) if owner[j])


def assignment_cost(cost, pairs) -> float:
    a = np.asarray(cost, dtype=np.float64)
    return float(sum(a[r, c] for r, c in pairs))

