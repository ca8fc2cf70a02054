"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Set ``ARW_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("ARW_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

grid_values = _impl.grid_values
eval_points = _impl.eval_points
bisect = _impl.bisect

__all__ = ["BACKEND", "grid_values", "eval_points", "bisect"]
