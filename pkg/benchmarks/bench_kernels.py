"""Compare the compiled kernels against the NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Each kernel is timed at a few problem sizes with ``timeit`` (best of
``--repeat`` runs) and the outputs of both backends are checked to agree.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np
from scipy.spatial import Delaunay

from artitwin import _kernels_py

try:
    from artitwin import _kernels as compiled
except ImportError:
    compiled = None


def _cases(rng):
    for n in (12, 64, 256):
        P = rng.standard_normal((n, 3))
        yield "coulomb_energy_grad", f"n={n}", (P,)
    for k, m, n in ((4, 4, 2_000), (8, 8, 20_000), (16, 16, 100_000)):
        a = (rng.random((k, n)) < 0.3).astype(np.uint8)
        b = (rng.random((m, n)) < 0.3).astype(np.uint8)
        yield "intersection_counts", f"{k}x{m}, N={n}", (a, b)
    for n in (200, 2_000, 10_000):
        pts = rng.random((n, 3))
        tets = Delaunay(pts).simplices.astype(np.int64)
        yield "tet_circumradii", f"{len(tets)} tets", (pts, tets)


def _best(fn, args, repeat: int) -> float:
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def _agree(x, y) -> bool:
    if isinstance(x, tuple):
        return all(_agree(a, b) for a, b in zip(x, y))
    return bool(np.allclose(x, y, rtol=1e-9, atol=1e-12))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    if compiled is None:
        print("compiled extension not built; only the NumPy backend is available", file=sys.stderr)
    rows = []
    for name, size, inputs in _cases(np.random.default_rng(args.seed)):
        py_fn = getattr(_kernels_py, name)
        row = {"kernel": name, "size": size, "numpy_s": _best(py_fn, inputs, args.repeat)}
        if compiled is not None:
            c_fn = getattr(compiled, name)
            row["cython_s"] = _best(c_fn, inputs, args.repeat)
            row["speedup"] = row["numpy_s"] / row["cython_s"]
            row["agree"] = _agree(c_fn(*inputs), py_fn(*inputs))
        rows.append(row)

    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'kernel':<22}{'size':>18}{'numpy':>12}{'cython':>12}{'speedup':>9}  agree")
    for r in rows:
        c = f"{r['cython_s'] * 1e3:>10.3f}ms" if "cython_s" in r else f"{'-':>12}"
        s = f"{r['speedup']:>8.1f}x" if "speedup" in r else f"{'-':>9}"
        print(f"{r['kernel']:<22}{r['size']:>18}{r['numpy_s'] * 1e3:>10.3f}ms{c}{s}  {r.get('agree', '-')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
