"""Backend selection for the lifting kernels.

The compiled extension is preferred; set ``ALOHA_PURE_PYTHON=1`` to force the
NumPy fallback (used by the benchmark and by the backend-equivalence tests).
"""
import os

from aloha import _hankel_py

if os.environ.get("ALOHA_PURE_PYTHON", "") not in ("", "0"):
    _impl = _hankel_py
    BACKEND = "python"
else:
    try:
        from aloha import _hankel_ext as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _hankel_py
        BACKEND = "python"

lift = _impl.lift
adjoint = _impl.adjoint
unlift = _impl.unlift

__all__ = ["BACKEND", "lift", "adjoint", "unlift"]
