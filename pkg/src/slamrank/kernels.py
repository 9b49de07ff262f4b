"""Dispatch to the numba or numpy kernel implementation.

The active backend is fixed at import time (see ``slamrank._accel``). Both
implementations stay importable so tests and the benchmark can compare them.
"""

from . import _kernels_np as numpy_impl
from ._accel import BACKEND, NUMBA_ENABLED

if NUMBA_ENABLED:
    from . import _kernels_jit as numba_impl

    _impl = numba_impl
else:
    numba_impl = None
    _impl = numpy_impl

NDCG, MAP, NDCG_K = 0, 1, 2

order_rows = _impl.order_rows
ndcg_rows = _impl.ndcg_rows
ndcg_at_k_rows = _impl.ndcg_at_k_rows
map_rows = _impl.map_rows
weights_rows = _impl.weights_rows
slam_rows = _impl.slam_rows
ranksvm_rows = _impl.ranksvm_rows
slam_ragged = _impl.slam_ragged
sgd_epoch = _impl.sgd_epoch

__all__ = [
    "BACKEND",
    "NDCG",
    "MAP",
    "NDCG_K",
    "numpy_impl",
    "numba_impl",
    "order_rows",
    "ndcg_rows",
    "ndcg_at_k_rows",
    "map_rows",
    "weights_rows",
    "slam_rows",
    "ranksvm_rows",
    "slam_ragged",
    "sgd_epoch",
]
