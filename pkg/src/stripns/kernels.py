"""Kernel selection: compiled extension when importable, NumPy fallback otherwise.

Set ``STRIPNS_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _modal_py

BACKEND = "python"
convection = _modal_py.convection
rk4_integrate = _modal_py.rk4_integrate

if os.environ.get("STRIPNS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _modal  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        convection = _modal.convection
        rk4_integrate = _modal.rk4_integrate

__all__ = ["BACKEND", "convection", "rk4_integrate"]
