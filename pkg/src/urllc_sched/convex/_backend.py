"""Select the compiled barrier kernels when available.

Set URLLC_SCHED_PURE_PYTHON=1 to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("URLLC_SCHED_PURE_PYTHON"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _kernels_c

        kernels = _kernels_c
        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
