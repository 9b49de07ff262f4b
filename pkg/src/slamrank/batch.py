"""Regularized empirical SLAM minimization by projected stochastic subgradient.

Minimizes ``(lam/2)||w||^2 + (1/n) sum_i slam_loss(X_i w, R_i, v_i)`` over the
l2 ball of radius B. Steps are ``B / (L sqrt(t))`` with ``L = lam B + 2 R_X``;
at the end of each epoch the average of the last half of all iterates is a
candidate, and the best candidate seen so far (starting from ``w = 0``) is
kept, so the reported trace never increases.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DivergenceError, EmptyDatasetError, ParameterError
from .measures import NDCG, as_measure


def _packed(data, measure):
    if len(data) == 0:
        raise EmptyDatasetError("dataset has no queries")
    X, R, offsets = data.packed()
    measure.check(R)
    return X, R, data.weights(measure), offsets


def objective(w, data, lam, measure=NDCG, delta=1.0):
    """Regularized mean SLAM loss of ``w`` on ``data``."""
    measure = as_measure(measure)
    if lam < 0:
        raise ParameterError("lambda must be nonnegative")
    X, R, V, offsets = _packed(data, measure)
    w = np.ascontiguousarray(w, dtype=np.float64)
    total, _, _ = kernels.slam_ragged(X, R, V, offsets, w, float(delta))
    return 0.5 * lam * float(w @ w) + total / len(data)


def auto_lambda(n, B, L2):
    """``sqrt((4 L2^2 / n) / (B^2/2 + 4 B^2 / n))``, which scales like 1/sqrt(n)."""
    if not (n >= 1 and B > 0 and L2 > 0):
        raise ParameterError("auto_lambda needs n >= 1, B > 0 and L2 > 0")
    return float(np.sqrt((4.0 * L2 ** 2 / n) / (B ** 2 / 2.0 + 4.0 * B ** 2 / n)))


@dataclass(frozen=True)
class BatchConfig:
    lam: float | str = "auto"
    B: float = 1e3
    epochs: int = 50
    measure: object = NDCG
    delta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.lam, str):
            if self.lam != "auto":
                raise ParameterError(f"lambda must be a number or 'auto', got {self.lam!r}")
        elif not (np.isfinite(self.lam) and self.lam >= 0):
            raise ParameterError("lambda must be nonnegative")
        if not (np.isfinite(self.B) and self.B > 0):
            raise ParameterError("B must be positive")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ParameterError("epochs must be an integer >= 1")
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        object.__setattr__(self, "measure", as_measure(self.measure))

    def resolve_lambda(self, data):
        if self.lam == "auto":
            return auto_lambda(len(data), self.B, 2.0 * data.stats.R_X)
        return float(self.lam)


@dataclass(frozen=True)
class Summary:
    """Mean measure value and mean SLAM loss of a model on one dataset."""

    metric: float
    surrogate: float
    n: int


def summarize(w, data, measure, delta=1.0):
    measure = as_measure(measure)
    X, R, V, offsets = _packed(data, measure)
    w = np.ascontiguousarray(w, dtype=np.float64)
    _, _, losses = kernels.slam_ragged(X, R, V, offsets, w, float(delta))
    vals = [measure.value(q.scores(w), q.R) for q in data]
    return Summary(float(np.mean(vals)), float(np.mean(losses)), len(data))


@dataclass
class FitResult:
    w: np.ndarray
    objective: float
    trace: list  # best objective after each epoch
    lam: float
    raw_trace: list = field(default_factory=list)  # suffix-average objective per epoch
    train: Summary | None = None
    test: Summary | None = None


def _project(w, radius):
    nrm = np.linalg.norm(w)
    if nrm > radius:
        w = w * (radius / nrm)
        # rounding can leave the norm a hair above the radius
        while np.linalg.norm(w) > radius:
            w = w * (1.0 - 1e-15)
    return w


def fit(data, cfg=None, test=None):
    cfg = cfg or BatchConfig()
    measure = cfg.measure
    X, R, V, offsets = _packed(data, measure)
    n, d = len(data), data.d
    lam = cfg.resolve_lambda(data)
    lip = lam * cfg.B + 2.0 * data.stats.R_X
    if lip == 0.0:
        lip = 1.0  # all-zero features: any step is as good as another
    delta = float(cfg.delta)

    def obj(w):
        val = objective(w, data, lam, measure, delta)
        if not np.isfinite(val):
            raise DivergenceError("objective became non-finite")
        return val

    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(d)
    csum = np.zeros(d)
    best_w, best = w.copy(), obj(w)
    trace, raw = [], []
    # csum after every step where some epoch's suffix window starts
    starts = sorted({(e + 1) * n // 2 for e in range(cfg.epochs)})
    saved = {0: np.zeros(d)}
    for e in range(cfg.epochs):
        t0 = e * n
        T = t0 + n
        half = T // 2
        visit = rng.permutation(n).astype(np.int64)
        snap_steps = np.array([h for h in starts if t0 < h <= T], dtype=np.int64)
        snaps = kernels.sgd_epoch(
            X, R, V, offsets, visit, w, lam, cfg.B, lip, t0, delta, csum, snap_steps
        )
        saved.update(zip(snap_steps.tolist(), snaps))
        half_sum = saved[half]
        cand = _project((csum - half_sum) / (T - half), cfg.B)
        val = obj(cand)
        raw.append(val)
        if val < best:
            best_w, best = cand, val
        trace.append(best)
    return FitResult(
        w=best_w,
        objective=best,
        trace=trace,
        lam=lam,
        raw_trace=raw,
        train=summarize(best_w, data, measure, delta),
        test=None if test is None else summarize(best_w, test, measure, delta),
    )
