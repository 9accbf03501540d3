"""Kernel selection: compiled extension when built, numpy/scipy otherwise.

Set ``ZWINF_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from zwinf import _kernels_py

BACKEND = "python"
if os.environ.get("ZWINF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from zwinf import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None
    if _compiled is not None:
        BACKEND = "cython"

if BACKEND == "cython":
    sparse_apply = _compiled.sparse_apply
    xspider_coo = _compiled.xspider_coo
else:
    sparse_apply = _kernels_py.sparse_apply
    xspider_coo = _kernels_py.xspider_coo

__all__ = ["BACKEND", "sparse_apply", "xspider_coo"]
