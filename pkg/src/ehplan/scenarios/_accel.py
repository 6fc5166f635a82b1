"""Pick the compiled kernels when importable.

Set ``EHPLAN_PURE_PYTHON=1`` to force the NumPy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py
if not os.environ.get("EHPLAN_PURE_PYTHON"):
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass
