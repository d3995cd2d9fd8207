"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Backend selection: the environment variable ``METRICLAB_BACKEND`` may be
set to ``numba`` (require numba, fail loudly if missing), ``numpy``
(force the fallback) or left unset/``auto`` (use numba when importable).
The active backend is exported as ``BACKEND``.
"""

from __future__ import annotations

import os

from . import _numpy_impl

_requested = os.environ.get("METRICLAB_BACKEND", "auto").lower()

if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"METRICLAB_BACKEND must be auto|numba|numpy, got {_requested!r}")

_impl = _numpy_impl
BACKEND = "numpy"

if _requested in ("auto", "numba"):
    try:
        from . import _numba_impl

        _impl = _numba_impl
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise

matp_mul_batch = _impl.matp_mul_batch
perm_apply_batch = _impl.perm_apply_batch
bfs_distances = _impl.bfs_distances
adj_matvec = _impl.adj_matvec
pair_scan_graph = _impl.pair_scan_graph

__all__ = [
    "BACKEND",
    "matp_mul_batch",
    "perm_apply_batch",
    "bfs_distances",
    "adj_matvec",
    "pair_scan_graph",
]
