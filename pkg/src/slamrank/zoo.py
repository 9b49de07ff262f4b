"""Comparison surrogates and an empirical l1-Lipschitz profiler.

Every surrogate here maps a score vector ``s`` and grades ``R`` to a convex
loss and a (sub)gradient with respect to ``s``. The profiler estimates how
``sup ||grad_s||_1`` grows with the list length m, which is what decides
whether a generalization bound for the surrogate can be free of m.
"""

import csv
import enum
import io
import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import InvalidRelevanceError, ParameterError, SizeError
from .metrics import MAX_GRADE, check_binary, check_relevance, check_scores
from .surrogate import slam_loss_and_grad, weights_map, weights_ndcg

STRUCT_MAX_M = 8


def _pair(s, R):
    s = check_scores(s)
    if len(s) != len(R):
        raise ValueError(f"lengths differ: s={len(s)}, R={len(R)}")
    return s


# ---------------------------------------------------------------- RankSVM

def ranksvm_loss_and_grad(s, R):
    """Pairwise hinge ``sum_{R_i > R_j} max(0, 1 + s_j - s_i)`` on binary grades."""
    R = check_binary(R)
    s = _pair(s, R)
    loss, grad = kernels.ranksvm_rows(s[None, :], R[None, :])
    return float(loss[0]), grad[0]


def ranksvm_loss(s, R):
    return ranksvm_loss_and_grad(s, R)[0]


def ranksvm_grad(s, R):
    return ranksvm_loss_and_grad(s, R)[1]


# ---------------------------------------------------------------- ListNet

def _log_softmax(x):
    z = x - x.max()
    return z - np.log(np.exp(z).sum())


def listnet_target(R):
    """Top-one target distribution: softmax of the raw grades."""
    R = check_relevance(R)
    return np.exp(_log_softmax(R.astype(np.float64)))


def listnet_loss_and_grad(s, R):
    """Cross entropy between the grade softmax and the score softmax."""
    R = check_relevance(R)
    s = _pair(s, R)
    p = listnet_target(R)
    logq = _log_softmax(s)
    return float(-(p * logq).sum()), np.exp(logq) - p


def listnet_loss(s, R):
    return listnet_loss_and_grad(s, R)[0]


def listnet_grad(s, R):
    return listnet_loss_and_grad(s, R)[1]


# ---------------------------------------------------------- StructMargin

@lru_cache(maxsize=None)
def _perm_tables(m):
    # row y of P lists documents from rank 1 to rank m; A[y, i] = -rank of i
    P = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
    A = np.empty_like(P)
    rows = np.arange(P.shape[0])[:, None]
    A[rows, P] = -(np.arange(m) + 1)
    P.setflags(write=False)
    A = A.astype(np.float64)
    A.setflags(write=False)
    return P, A


def _struct_check(s, R):
    R = check_relevance(R)
    s = _pair(s, R)
    if len(np.unique(R)) != len(R):
        raise InvalidRelevanceError("structured margin needs distinct grades")
    if len(R) > STRUCT_MAX_M:
        raise SizeError(f"exact maximization is limited to m <= {STRUCT_MAX_M}")
    return s, R


def struct_margin_loss_and_grad(s, R):
    """``max_y [1 - NDCG(y) + s.A(y) - s.A(y_q)]`` with ``A(y)_i = -rank_y(i)``.

    ``y_q`` sorts documents by decreasing grade. The max over all m!
    rankings is taken exactly; ties go to the first ranking in
    lexicographic order of the document sequence.
    """
    s, R = _struct_check(s, R)
    m = len(R)
    P, A = _perm_tables(m)
    gains = 2.0 ** R[P] - 1.0
    disc = 1.0 / np.log2(np.arange(2, m + 2))
    dcg = gains @ disc
    ideal = dcg.max()
    delta = 1.0 - dcg / ideal if ideal > 0 else np.zeros(len(P))
    a_q = np.empty(m)
    a_q[np.argsort(-R)] = -(np.arange(m) + 1)
    obj = delta + A @ s - a_q @ s
    y = int(np.argmax(obj))
    if obj[y] <= 0.0:
        return 0.0, np.zeros(m)
    return float(obj[y]), A[y] - a_q


def struct_margin_loss(s, R):
    return struct_margin_loss_and_grad(s, R)[0]


def struct_margin_grad(s, R):
    return struct_margin_loss_and_grad(s, R)[1]


# ---------------------------------------------------------------- kinds

def _slam_ndcg(s, R):
    return slam_loss_and_grad(s, R, weights_ndcg(R))


def _slam_map(s, R):
    return slam_loss_and_grad(s, R, weights_map(R))


class SurrogateKind(enum.Enum):
    SLAM_NDCG = "slam-ndcg"
    SLAM_MAP = "slam-map"
    RANKSVM = "ranksvm"
    LISTNET = "listnet"
    STRUCTMARGIN = "structmargin"

    @classmethod
    def parse(cls, text):
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            tags = ", ".join(k.value for k in cls)
            raise ParameterError(f"unknown surrogate {text!r}; choose from {tags}") from None

    @property
    def loss_and_grad(self):
        return _IMPL[self]

    def loss(self, s, R):
        return self.loss_and_grad(s, R)[0]

    def grad(self, s, R):
        return self.loss_and_grad(s, R)[1]

    @property
    def binary(self):
        return self in (SurrogateKind.SLAM_MAP, SurrogateKind.RANKSVM)

    def sample_grades(self, m, rng):
        """Grades drawn the way the profiler and the property tests draw them."""
        if self is SurrogateKind.STRUCTMARGIN:
            return rng.permutation(m).astype(np.int64)
        top = 1 if self.binary else MAX_GRADE
        return rng.integers(0, top + 1, size=m)


_IMPL = {
    SurrogateKind.SLAM_NDCG: _slam_ndcg,
    SurrogateKind.SLAM_MAP: _slam_map,
    SurrogateKind.RANKSVM: ranksvm_loss_and_grad,
    SurrogateKind.LISTNET: listnet_loss_and_grad,
    SurrogateKind.STRUCTMARGIN: struct_margin_loss_and_grad,
}


def as_kind(kind):
    return kind if isinstance(kind, SurrogateKind) else SurrogateKind.parse(kind)


# ------------------------------------------------------------- profiler

def _reversed_scores(R, scale):
    """Scores that rank the grades exactly backwards, spaced ``scale`` apart."""
    order = np.argsort(R, kind="stable")  # least relevant first
    s = np.empty(len(R))
    s[order] = scale * np.arange(len(R), 0, -1)
    return s


def adversarial_instances(kind, m, rng):
    """Structured worst-case candidates for list length m.

    Grade patterns: a single relevant document, all but one relevant, an even
    split, and one random draw; each is scored in reverse order at several
    scales. Kinds with distinct grades use ``0..m-1``.
    """
    kind = as_kind(kind)
    if kind is SurrogateKind.STRUCTMARGIN:
        patterns = [np.arange(m, dtype=np.int64), kind.sample_grades(m, rng)]
    else:
        hi = 1 if kind.binary else MAX_GRADE
        patterns = []
        for g in sorted({1, hi}):
            one = np.zeros(m, dtype=np.int64)
            one[-1] = g
            most = np.full(m, g, dtype=np.int64)
            most[-1] = 0
            half = np.zeros(m, dtype=np.int64)
            half[: m // 2] = g
            patterns += [one, most, half]
        patterns.append(kind.sample_grades(m, rng))
    out = []
    for R in patterns:
        if np.all(R == R[0]):
            continue
        for scale in (0.1, 1.0, 10.0, 100.0):
            out.append((_reversed_scores(R, scale), R))
    return out


@dataclass(frozen=True)
class ProfileRecord:
    m: int
    sup_l1: float
    trials: int


@dataclass
class LipschitzProfile:
    kind: str
    records: list = field(default_factory=list)
    seed: int = 0

    @property
    def m_values(self):
        return [r.m for r in self.records]

    @property
    def sups(self):
        return [r.sup_l1 for r in self.records]

    @property
    def exponent(self):
        """Least-squares slope of log sup against log m."""
        if len(self.records) < 2:
            return 0.0
        x = np.log(self.m_values)
        y = np.log(np.maximum(self.sups, np.finfo(float).tiny))
        return float(np.polyfit(x, y, 1)[0])

    def to_csv(self, target):
        if isinstance(target, (str, os.PathLike)):
            with open(target, "w", newline="", encoding="utf-8") as fh:
                self.to_csv(fh)
            return
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["kind", "m", "sup_l1", "trials"])
        for r in self.records:
            writer.writerow([self.kind, r.m, repr(r.sup_l1), r.trials])

    def csv_text(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def lipschitz_profile(kind, m_values, trials=200, seed=0):
    """Largest observed ``||grad_s||_1`` per m over random and adversarial inputs.

    Random inputs use standard-normal scores and grades drawn by
    :meth:`SurrogateKind.sample_grades`.
    """
    kind = as_kind(kind)
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    m_values = [int(m) for m in m_values]
    if not m_values or min(m_values) < 2:
        raise ParameterError("m values must be >= 2")
    if kind is SurrogateKind.STRUCTMARGIN and max(m_values) > STRUCT_MAX_M:
        raise SizeError(f"structured margin profiles need m <= {STRUCT_MAX_M}")
    rng = np.random.default_rng(seed)
    fn = kind.loss_and_grad
    prof = LipschitzProfile(kind.value, seed=seed)
    for m in m_values:
        best, count = 0.0, 0
        for _ in range(trials):
            R = kind.sample_grades(m, rng)
            s = rng.standard_normal(m)
            best = max(best, float(np.abs(fn(s, R)[1]).sum()))
            count += 1
        for s, R in adversarial_instances(kind, m, rng):
            best = max(best, float(np.abs(fn(s, R)[1]).sum()))
            count += 1
        prof.records.append(ProfileRecord(m, best, count))
    return prof
