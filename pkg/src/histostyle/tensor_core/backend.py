"""Kernel backend selection.

The compiled Cython extension is preferred; the NumPy fallback is used when
the extension is missing or when ``HISTOSTYLE_FORCE_NUMPY=1`` is set.  Both
expose identical functions, so callers import ``kernels`` from here and stay
backend-agnostic.
"""

import os

from . import _kernels_np

if os.environ.get("HISTOSTYLE_FORCE_NUMPY") == "1":
    kernels = _kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _kernels  # type: ignore[attr-defined]

        kernels = _kernels
        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_np
        BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND
