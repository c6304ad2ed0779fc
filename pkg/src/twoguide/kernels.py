"""Backend selection for the trajectory kernels.

The compiled extension is preferred; set TWOGUIDE_PURE_PYTHON=1 to force
the numpy fallback.
"""
import os

from . import _pykernels

if os.environ.get("TWOGUIDE_PURE_PYTHON", "") not in ("", "0"):
    _ext = None
else:
    try:
        from . import _kernels as _ext
    except ImportError:
        _ext = None

BACKEND = "cython" if _ext is not None else "python"
_impl = _ext if _ext is not None else _pykernels

velocity = _impl.velocity
rk4_integrate = _impl.rk4_integrate


def get(backend=None):
    """Module implementing ``backend`` ('cython', 'python' or None for the default)."""
    if backend is None:
        return _impl
    if backend == "python":
        return _pykernels
    if backend == "cython":
        if _ext is None:
            raise ImportError("compiled kernels are not built")
        return _ext
    raise ValueError(f"unknown backend {backend!r}")
