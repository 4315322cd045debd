"""Tableau kernel selection: compiled extension if present, numpy otherwise.

Set QNETSIM_NO_EXT=1 to force the numpy path (used by the kernel benchmark
and the parity tests).
"""
from __future__ import annotations

import os

from . import _tableau_py

if os.environ.get("QNETSIM_NO_EXT") == "1":
    impl = _tableau_py
else:
    try:
        from . import _tableau_cy as impl  # type: ignore[no-redef]
    except ImportError:
        impl = _tableau_py

IMPL = impl.IMPL
mul_into_rows = impl.mul_into_rows
xor_into_rows = impl.xor_into_rows
row_product = impl.row_product
