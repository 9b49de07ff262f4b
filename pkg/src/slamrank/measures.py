"""Ranking measures as values: ``ndcg``, ``map`` and ``ndcg@K``."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidRelevanceError, ParameterError


@dataclass(frozen=True)
class RankingMeasure:
    kind: str  # "ndcg", "map" or "ndcg@k"
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("ndcg", "map", "ndcg@k"):
            raise ParameterError(f"unknown measure {self.kind!r}")
        if self.kind == "ndcg@k":
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ParameterError("ndcg@k needs a cutoff k >= 1")
        elif self.k is not None:
            raise ParameterError(f"{self.kind} takes no cutoff")

    @classmethod
    def parse(cls, text):
        t = str(text).strip().lower()
        if t in ("ndcg", "map"):
            return cls(t)
        if t.startswith("ndcg@"):
            try:
                k = int(t[5:])
            except ValueError:
                raise ParameterError(f"bad cutoff in measure {text!r}") from None
            return cls("ndcg@k", k)
        raise ParameterError(f"unknown measure {text!r}")

    @property
    def tag(self):
        return f"ndcg@{self.k}" if self.kind == "ndcg@k" else self.kind

    @property
    def code(self):
        return {"ndcg": kernels.NDCG, "map": kernels.MAP, "ndcg@k": kernels.NDCG_K}[self.kind]

    def cutoff(self, m):
        """Cutoff actually used for a list of m documents (k clamped to m)."""
        if self.kind != "ndcg@k":
            return m
        return min(self.k, m)

    def check(self, R):
        if self.kind == "map" and np.any(np.asarray(R) > 1):
            raise InvalidRelevanceError("MAP needs binary relevance")

    def gain_rows(self, S, R):
        """Measure value for each row of equal-length score/relevance arrays."""
        if self.kind == "ndcg":
            return kernels.ndcg_rows(S, R)
        if self.kind == "map":
            return kernels.map_rows(S, R)
        K = np.full(S.shape[0], self.cutoff(S.shape[1]), dtype=np.int64)
        return kernels.ndcg_at_k_rows(S, R, K)

    def weight_rows(self, R):
        K = np.full(R.shape[0], self.cutoff(R.shape[1]), dtype=np.int64)
        return kernels.weights_rows(R, self.code, K)

    def value(self, s, R):
        S = np.asarray(s, dtype=np.float64)[None, :]
        return float(self.gain_rows(S, np.asarray(R, dtype=np.int64)[None, :])[0])

    def loss(self, s, R):
        """Measure-induced loss ``1 - value``; exactly 0 for a perfect ranking."""
        return 1.0 - self.value(s, R)

    def __str__(self):
        return self.tag


NDCG = RankingMeasure("ndcg")
MAP = RankingMeasure("map")


def as_measure(measure):
    if isinstance(measure, RankingMeasure):
        return measure
    return RankingMeasure.parse(measure)
