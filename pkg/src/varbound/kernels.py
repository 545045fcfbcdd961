"""Grid-kernel backend selection.

The compiled extension is used when it imported cleanly, the field carries a
corpus kind tag, every weight has a kernel id, and n <= 3; anything else runs
on the NumPy fallback, which accepts arbitrary vectorized callables.  Set
VARBOUND_BACKEND=numpy to force the fallback (used by the benchmark and the
backend-agreement tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py as _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built: pure-Python install
    _compiled = None


def compiled_available() -> bool:
    return _compiled is not None


def _forced_numpy() -> bool:
    return os.environ.get("VARBOUND_BACKEND", "auto").lower() == "numpy"


def backend_name() -> str:
    return "cython" if (compiled_available() and not _forced_numpy()) else "numpy"


def _can_compile(field, weights, n: int) -> bool:
    return (field.kernel is not None and n <= 3
            and all(w.kernel_id is not None for w in weights))


def field_band_sums(field, cells: int, a_grid, weights, backend: str = "auto"):
    """Dispatch the bucketed grid sums for one field; see _kernels_py.band_sums."""
    dom = field.domain
    a_grid = np.asarray(a_grid, dtype=float)
    use_compiled = compiled_available() and _can_compile(field, weights, dom.n)
    if backend == "auto":
        use_compiled = use_compiled and not _forced_numpy()
    elif backend == "cython":
        if not compiled_available():
            raise RuntimeError("compiled kernel extension is not available")
        if not _can_compile(field, weights, dom.n):
            raise ValueError("field/weights cannot run on the compiled kernel")
    elif backend == "numpy":
        use_compiled = False
    else:
        raise ValueError(f"unknown backend {backend!r}")

    if use_compiled or backend == "cython":
        kind, params = field.kernel
        return _compiled.band_sums(kind, tuple(params), dom.center, dom.half_side,
                                   cells, a_grid, [w.kernel_id for w in weights])
    return _fallback.band_sums(field.eval, field.grad, dom.center, dom.half_side,
                               cells, a_grid, [w.eval for w in weights])
