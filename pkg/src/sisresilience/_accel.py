"""Backend selection: numba JIT when available, pure numpy otherwise.

Set ``SISRES_NO_NUMBA=1`` to force the numpy path. Both paths produce
bit-identical results; the numpy path exists for portability and as a
cross-check of the compiled kernels.
"""
import os

_FORCE_NUMPY = os.environ.get("SISRES_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _FORCE_NUMPY:
        raise ImportError("numba disabled by SISRES_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def default_backend():
    return "numba" if HAVE_NUMBA else "numpy"


def resolve_backend(backend=None):
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable")
    return backend
