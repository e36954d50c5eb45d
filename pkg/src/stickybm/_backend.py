"""Kernel backend selection: compiled extension if available, numpy fallback.

Set STICKYBM_BACKEND=numpy (or =cython) to force a choice; forcing
cython when the extension is missing is an error, everything else
degrades silently.  Both backends are bit-identical, so the choice only
affects speed.
"""

from __future__ import annotations

import os

from . import _kernels_py

_REQUESTED = os.environ.get("STICKYBM_BACKEND", "").strip().lower()

if _REQUESTED == "numpy":
    kernels = _kernels_py
else:
    try:
        from . import _kernels  # compiled

        kernels = _kernels
    except ImportError:
        if _REQUESTED == "cython":
            raise ImportError(
                "STICKYBM_BACKEND=cython but the compiled extension is not built"
            )
        kernels = _kernels_py

BACKEND = kernels.BACKEND_NAME


def available_backends() -> dict:
    """Name -> module for every importable backend (used by benchmarks/tests)."""
    out = {"numpy": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
