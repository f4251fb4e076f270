"""Counting kernels: the compiled extension when built, numpy otherwise.

Set ``SAMPLING_PRIVACY_PURE=1`` to force the numpy implementation.
"""
import os

from . import _py

sp_responses = _py.sp_responses

if os.environ.get("SAMPLING_PRIVACY_PURE"):
    _impl = _py
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = _py

BACKEND = "compiled" if _impl is not _py else "numpy"

sp_counts = _impl.sp_counts
rr_counts = _impl.rr_counts
toy_counts = _impl.toy_counts

__all__ = ["BACKEND", "sp_counts", "rr_counts", "toy_counts", "sp_responses"]
