"""RK4 kernel selection: compiled extension if built, NumPy fallback otherwise.

Set RYDCHIRP_FORCE_PYTHON_KERNEL=1 to force the fallback (used by the
benchmark and by tests that cross-check the two implementations).
"""
from __future__ import annotations

import os

if os.environ.get("RYDCHIRP_FORCE_PYTHON_KERNEL", "") not in ("", "0"):
    from ._rk4_fallback import rk4_propagate

    KERNEL_BACKEND = "python"
else:
    try:
        from ._rk4 import rk4_propagate

        KERNEL_BACKEND = "compiled"
    except ImportError:
        from ._rk4_fallback import rk4_propagate

        KERNEL_BACKEND = "python"

__all__ = ["rk4_propagate", "KERNEL_BACKEND"]
