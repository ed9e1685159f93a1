"""Select the shrink-kernel backend at import time.

The compiled Cython kernel is preferred; the pure-numpy fallback is used when
the extension is unavailable or ``SRPCP_PURE_PYTHON`` is set to a nonempty
value other than ``0``.
"""

import os

if os.environ.get("SRPCP_PURE_PYTHON", "0") not in ("", "0"):
    from srpcp import _kernels_py as kernels
else:
    try:
        from srpcp import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - compiled extension missing
        from srpcp import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name():
    """Name of the active shrink-kernel backend: "cython" or "python"."""
    return kernels.BACKEND
