"""Kernel backend selection.

The compiled extension is used when importable; set ``NOCLICK_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

if os.environ.get("NOCLICK_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

representatives = _impl.representatives
enumerate_reps = _impl.enumerate_reps
offdiag_flips = _impl.offdiag_flips
dsff_signal = _impl.dsff_signal

__all__ = ["BACKEND", "representatives", "enumerate_reps", "offdiag_flips", "dsff_signal"]
