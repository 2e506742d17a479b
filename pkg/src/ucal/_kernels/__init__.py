"""Clustering hot kernels: compiled core with a pure NumPy fallback.

The compiled Cython extension is used when it imports; otherwise (or when the
``UCAL_PURE_PYTHON`` environment variable is set to a non-empty value other
than ``0``) the pure implementation is selected. Both expose the same
functions with identical observable behaviour, enforced by the parity tests.
"""

from __future__ import annotations

import os

from . import _pure

_impl = _pure
if os.environ.get("UCAL_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = "pure" if _impl is _pure else "compiled"

dbscan_labels = _impl.dbscan_labels
kmedoids = _impl.kmedoids

__all__ = ["BACKEND", "dbscan_labels", "kmedoids"]
