from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .metrics import check_relevance


@dataclass(frozen=True, eq=False)
class QueryInstance:
    """One query: an m x d feature matrix ``X`` and its relevance grades ``R``."""

    X: np.ndarray
    R: np.ndarray
    qid: str = ""
    # grades above this cap are rejected; None disables the check
    max_grade: int | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionError("feature matrix must be 2-d")
        R = np.asarray(self.R)
        if R.ndim == 1 and R.size == 0:
            R = R.astype(np.int64)  # empty query; Dataset drops these
        else:
            R = check_relevance(R, self.max_grade)
        if X.shape[0] != R.shape[0]:
            raise DimensionError(f"{X.shape[0]} feature rows for {R.shape[0]} labels")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        X.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "R", R)

    @property
    def m(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def degenerate(self):
        """True when no ordering of the documents can be wrong."""
        return self.m < 2 or bool(np.all(self.R == self.R[0]))

    def scores(self, w):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.d,):
            raise DimensionError(f"parameter of length {w.size} for d={self.d}")
        return self.X @ w

    def __eq__(self, other):
        if not isinstance(other, QueryInstance):
            return NotImplemented
        return (
            self.qid == other.qid
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.R, other.R)
        )

    __hash__ = None
