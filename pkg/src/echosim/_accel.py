"""Numba switch.

Set ``ECHOSIM_PURE_NUMPY=1`` to run every kernel as plain Python/numpy. The
flag is read once at import time, so it has to be set before ``echosim`` is
imported (the benchmark and the backend-equivalence test do this through a
subprocess).
"""
from __future__ import annotations

import os

PURE_NUMPY = os.environ.get("ECHOSIM_PURE_NUMPY", "").strip().lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_ENABLED = numba is not None and not PURE_NUMPY


def jit(func):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    return func


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
