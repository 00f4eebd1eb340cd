"""Hot-kernel dispatch: the compiled extension when built, NumPy otherwise.

Set ``ARTITWIN_PURE_PYTHON=1`` to force the NumPy path.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ARTITWIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

coulomb_energy_grad = _impl.coulomb_energy_grad
intersection_counts = _impl.intersection_counts
tet_circumradii = _impl.tet_circumradii

__all__ = ["BACKEND", "coulomb_energy_grad", "intersection_counts", "tet_circumradii"]
