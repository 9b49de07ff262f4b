"""NDCG, truncated NDCG and MAP for a single query.

Scores are turned into a ranking by sorting in decreasing order; exact ties
go to the document with the smaller index. Degenerate queries (all-zero
gains for NDCG, no relevant document for MAP) score 1.0.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DimensionError,
    InvalidCutoffError,
    InvalidGradeError,
    InvalidRankError,
    InvalidRelevanceError,
)

MAX_GRADE = 4


def gain(r):
    """Gain ``2**r - 1`` of an integer relevance grade."""
    if int(r) != r or r < 0:
        raise InvalidGradeError(f"grade must be a nonnegative integer, got {r!r}")
    return 2.0 ** int(r) - 1.0


def discount(position):
    """Position discount ``1 / log2(position + 1)`` for a 1-based rank."""
    if int(position) != position or position < 1:
        raise InvalidRankError(f"rank must be an integer >= 1, got {position!r}")
    return 1.0 / np.log2(position + 1.0)


@dataclass(frozen=True)
class Permutation:
    """Ranking of m documents.

    ``order[i]`` is the document placed at rank ``i + 1``; ``inverse[doc]`` is
    the 0-based rank of ``doc``.
    """

    order: np.ndarray

    @property
    def inverse(self):
        inv = np.empty_like(self.order)
        inv[self.order] = np.arange(len(self.order))
        return inv

    def __len__(self):
        return len(self.order)


def check_scores(s):
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise DimensionError("score vector must be a nonempty 1-d array")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    return s


def check_relevance(R, max_grade=None):
    """Validate a relevance vector and return it as an int64 array.

    ``max_grade=None`` skips the upper bound check.
    """
    arr = np.asarray(R)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError("relevance vector must be a nonempty 1-d array")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise InvalidGradeError("relevance grades must be integers")
    elif arr.dtype.kind not in "iub":
        raise InvalidGradeError(f"unsupported relevance dtype {arr.dtype}")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise InvalidGradeError("relevance grades must be nonnegative")
    if max_grade is not None and np.any(arr > max_grade):
        raise InvalidGradeError(f"relevance grades must be <= {max_grade}")
    return arr


def check_binary(R):
    R = check_relevance(R)
    if np.any(R > 1):
        raise InvalidRelevanceError("MAP needs binary relevance")
    return R


def _pair(s, R):
    s = check_scores(s)
    R = check_relevance(R)
    if s.shape != R.shape:
        raise DimensionError(f"{s.size} scores for {R.size} relevance labels")
    return s, R


def permutation_from_scores(s):
    s = check_scores(s)
    return Permutation(kernels.order_rows(s[None, :])[0])


def ideal_dcg(R, k="all"):
    """Largest achievable DCG (over the top ``k`` positions when k is an int)."""
    R = check_relevance(R)
    m = R.size
    if k == "all" or k is None:
        k = m
    elif int(k) != k or not 1 <= k <= m:
        raise InvalidCutoffError(f"cutoff must be in 1..{m}, got {k!r}")
    top = np.sort(R)[::-1][: int(k)]
    return float(np.sum((2.0 ** top - 1.0) / np.log2(np.arange(2.0, k + 2.0))))


def ndcg(s, R):
    s, R = _pair(s, R)
    return float(kernels.ndcg_rows(s[None, :], R[None, :])[0])


def ndcg_at_k(s, R, k):
    """NDCG restricted to the k most relevant documents.

    Documents are taken in decreasing relevance; among equal grades the one
    ranked higher gets the smaller canonical index, so the value depends only
    on the grades in ranked order. ``k = m`` gives :func:`ndcg`.
    """
    s, R = _pair(s, R)
    if int(k) != k or not 1 <= k <= R.size:
        raise InvalidCutoffError(f"cutoff must be in 1..{R.size}, got {k!r}")
    K = np.array([int(k)], dtype=np.int64)
    return float(kernels.ndcg_at_k_rows(s[None, :], R[None, :], K)[0])


def map_score(s, R):
    s, R = _pair(s, R)
    if np.any(R > 1):
        raise InvalidRelevanceError("MAP needs binary relevance")
    return float(kernels.map_rows(s[None, :], R[None, :])[0])
