"""Solver kernel selection.

The compiled extension is used when present; the numpy fallback produces
bit-identical results, just slower.  Set SKYCAST_PURE_PYTHON=1 to force the
fallback (used by the benchmark and backend-parity tests).
"""

import os

from . import reference

backend_name = "reference"
coupled_jacobi = reference.coupled_jacobi

if not os.environ.get("SKYCAST_PURE_PYTHON"):
    try:
        from . import _native

        coupled_jacobi = _native.coupled_jacobi
        backend_name = "native"
    except ImportError:
        pass

__all__ = ["coupled_jacobi", "backend_name", "reference"]
