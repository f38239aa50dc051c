"""Backend selection for the numeric kernels.

The compiled extension is used when it was built and ``STABPATH_PURE_PYTHON``
is unset (or ``0``); otherwise the pure-Python fallback is loaded.  Both
expose the same functions; callers pass float64 numpy arrays.
"""
import os

import numpy as np

from . import _kernels_py


def _load():
    if os.environ.get("STABPATH_PURE_PYTHON", "0") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "cython"


_impl, BACKEND = _load()


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def wrap_angle(x: float) -> float:
    return _impl.wrap_angle(float(x))


def unwrap_increments(arg_w, arg_mid, d_im_s):
    """Return ``(increments, bad_index)``; ``bad_index`` is -1 on success."""
    arg_w, arg_mid, d_im_s = _f64(arg_w), _f64(arg_mid), _f64(d_im_s)
    out = np.zeros(max(len(arg_w) - 1, 0))
    bad = _impl.unwrap_increments(arg_w, arg_mid, d_im_s, out)
    return out, int(bad)


def shift_gap(psi_i, psi_j, r: float, eps: float) -> int:
    return int(_impl.shift_gap(_f64(psi_i), _f64(psi_j), float(r), float(eps)))


def slice_distance(pa, pb, max_shift: int = 3) -> float:
    return float(_impl.slice_distance(_f64(pa), _f64(pb), int(max_shift)))


def backend_module(name: str):
    """Explicit access to one backend (``"python"`` or ``"cython"``) for tests and benchmarks."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]
        return _kernels
    raise ValueError(name)
