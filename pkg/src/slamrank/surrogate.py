"""The SLAM family of listwise large-margin surrogates.

For a weight vector ``v >= 0`` the loss of scores ``s`` against grades ``R`` is

    sum_i v_i * max(0, max_j [R_i > R_j] * (delta + s_j - s_i))

Weight vectors are defined on documents sorted by decreasing grade (equal
grades keep input order) and returned in the caller's document order.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateWeightsError, DimensionError, InvalidCutoffError, ParameterError
from .measures import NDCG, RankingMeasure, as_measure
from .metrics import check_binary, check_relevance, check_scores


@dataclass(frozen=True)
class SlamWeights:
    v: np.ndarray
    measure: str
    degenerate: bool = False

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.v, dtype=dtype)

    def __len__(self):
        return len(self.v)

    @property
    def total(self):
        return float(self.v.sum())


@dataclass(frozen=True)
class SlamConfig:
    delta: float = 1.0
    measure: RankingMeasure = NDCG

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        object.__setattr__(self, "measure", as_measure(self.measure))


def _wrap(V, tag):
    v = V[0]
    v.setflags(write=False)
    return SlamWeights(v, tag, degenerate=not bool(np.any(v > 0)))


def weights_map(R):
    """MAP weights: ``1/r - i/(r(m-r+i))`` on the r relevant documents.

    All-zero (and flagged degenerate) when r is 0 or m.
    """
    R = check_binary(R)
    V = kernels.weights_rows(R[None, :], kernels.MAP, np.zeros(1, dtype=np.int64))
    return _wrap(V, "map")


def weights_ndcg(R):
    R = check_relevance(R)
    V = kernels.weights_rows(R[None, :], kernels.NDCG, np.zeros(1, dtype=np.int64))
    return _wrap(V, "ndcg")


def weights_ndcg_at_k(R, k):
    R = check_relevance(R)
    if int(k) != k or not 1 <= k <= R.size:
        raise InvalidCutoffError(f"cutoff must be in 1..{R.size}, got {k!r}")
    V = kernels.weights_rows(R[None, :], kernels.NDCG_K, np.array([int(k)], dtype=np.int64))
    return _wrap(V, f"ndcg@{int(k)}")


def weights_for(measure, R):
    """Weights of the SLAM member that upper-bounds ``measure`` on ``R``.

    An ``ndcg@k`` cutoff larger than the list is clamped to its length.
    """
    measure = as_measure(measure)
    if measure.kind == "map":
        return weights_map(R)
    if measure.kind == "ndcg":
        return weights_ndcg(R)
    return weights_ndcg_at_k(R, measure.cutoff(len(R)))


def _prepare(s, R, v):
    s = check_scores(s)
    R = check_relevance(R)
    v = np.asarray(v, dtype=np.float64)
    if not (s.shape == R.shape == v.shape):
        raise DimensionError(f"lengths differ: s={s.size}, R={R.size}, v={v.size}")
    if np.any(v < 0):
        raise ValueError("weights must be nonnegative")
    return s, R, v


def _delta(cfg, delta):
    if cfg is not None:
        return cfg.delta
    if not delta > 0:
        raise ParameterError("delta must be positive")
    return float(delta)


def slam_loss_and_grad(s, R, v, cfg=None, delta=1.0):
    """Loss and a subgradient with respect to the scores.

    When several less relevant documents attain the inner max, the one with
    the smallest index is used.
    """
    s, R, v = _prepare(s, R, v)
    loss, grad = kernels.slam_rows(s[None, :], R[None, :], v[None, :], _delta(cfg, delta))
    return float(loss[0]), grad[0]


def slam_loss(s, R, v, cfg=None, delta=1.0):
    return slam_loss_and_grad(s, R, v, cfg, delta)[0]


def slam_subgradient_scores(s, R, v, cfg=None, delta=1.0):
    return slam_loss_and_grad(s, R, v, cfg, delta)[1]


def slam_subgradient_params(q, w, v, cfg=None, delta=1.0):
    """Subgradient with respect to the linear model: ``X.T @ g_s`` at ``s = Xw``."""
    s = q.scores(w)
    return q.X.T @ slam_subgradient_scores(s, q.R, v, cfg, delta)


def v_max_ratio(v):
    """Largest ratio between two positive weights (1 with a single positive entry)."""
    v = np.asarray(v, dtype=np.float64)
    pos = v[v > 0]
    if pos.size == 0:
        raise DegenerateWeightsError("weight vector has no positive entry")
    return float(pos.max() / pos.min())
