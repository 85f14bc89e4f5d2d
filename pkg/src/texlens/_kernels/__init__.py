"""Numeric hot kernels with a compiled fast path.

The Cython extension is preferred when importable; otherwise the pure-numpy
fallback is used. Both expose the same two functions with identical
contracts. Set TEXLENS_KERNELS=fallback (or =compiled) to force a backend;
forcing `compiled` raises if the extension is missing.

benchmarks/bench_kernels.py compares the two backends.
"""

import os

import numpy as np

from . import fallback as _fallback

_requested = os.environ.get("TEXLENS_KERNELS", "").strip().lower()
if _requested not in ("", "compiled", "fallback"):
    raise ImportError(f"TEXLENS_KERNELS must be 'compiled' or 'fallback', got {_requested!r}")

_compiled = None
if _requested != "fallback":
    try:
        from . import _core as _compiled
    except ImportError:
        if _requested == "compiled":
            raise
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback
BACKEND = "compiled" if _compiled is not None else "fallback"


def _c_f64(x, ndim):
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"expected {ndim}-D array, got {arr.ndim}-D")
    return arr


def pairwise_distances(a, b):
    """(m, d) x (n, d) -> (m, n) Euclidean distance matrix in float64."""
    return _impl.pairwise_distances(_c_f64(a, 2), _c_f64(b, 2))


def smoe_map(x, eps=1e-7):
    """(channels, h, w) -> (h, w) channel dispersion statistic."""
    return _impl.smoe_map(_c_f64(x, 3), float(eps))


def available_backends():
    names = ["fallback"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return tuple(names)


def get_backend(name):
    """Return a specific backend module (for tests and benchmarks)."""
    if name == "fallback":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled backend unavailable")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
