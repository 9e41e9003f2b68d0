"""Optional numba acceleration.

Set ``EGOCLIQUE_NUMBA=0`` before import to force the pure numpy/Python
paths. Numba is also skipped silently when it is not installed.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("EGOCLIQUE_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

if _numba is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    # prefer layers that need no extra runtime; tbb is often present but too old
    _numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

USE_NUMBA = _numba is not None and _FLAG not in {"0", "false", "no", "off"}


def jit(func=None, *, parallel=False):
    """``numba.njit(cache=True)`` when acceleration is on, identity otherwise."""

    def wrap(f):
        if not USE_NUMBA:
            return f
        return _numba.njit(cache=True, parallel=parallel)(f)

    if func is None:
        return wrap
    return wrap(func)


if USE_NUMBA:
    prange = _numba.prange
else:
    prange = range


def set_threads(n: int | None) -> None:
    """Cap the numba thread pool; no-op without numba."""
    if not USE_NUMBA or n is None:
        return
    n = max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS))
    _numba.set_num_threads(n)


def num_threads() -> int:
    return _numba.get_num_threads() if USE_NUMBA else 1


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
