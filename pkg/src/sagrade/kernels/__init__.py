"""Clustering hot-loop kernels.

The compiled Cython extension is preferred; the pure-NumPy module is the
fallback when the extension was not built.  Set SAGRADE_KERNELS=python to
force the fallback (used by the benchmark).
"""

import os

from . import _py

if os.environ.get("SAGRADE_KERNELS", "").lower() == "python":
    _impl = _py
else:
    try:
        from . import _ck as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _py

BACKEND = _impl.BACKEND
sq_distances = _impl.sq_distances
assign = _impl.assign
distortion = _impl.distortion
update_centroids = _impl.update_centroids

__all__ = ["BACKEND", "sq_distances", "assign", "distortion", "update_centroids"]
