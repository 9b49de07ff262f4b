"""Perceptron-like online ranker and its cumulative-loss bounds.

At round t the learner scores the query with ``w_t``, and only if the
measure-induced loss of that ranking is nonzero it moves ``w`` against a
subgradient of the SLAM surrogate: ``w_{t+1} = w_t - X_t.T @ g_t``. The step
size is fixed to 1; rankings are invariant to positive rescaling of ``w``.
"""

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .measures import as_measure
from .surrogate import slam_loss, slam_loss_and_grad, v_max_ratio, weights_for


@dataclass(frozen=True)
class OnlineState:
    w: np.ndarray
    t: int = 0
    cum_rml: float = 0.0
    cum_surrogate: float = 0.0
    n_updates: int = 0

    @classmethod
    def initial(cls, d):
        return cls(np.zeros(d))


@dataclass(frozen=True)
class RoundRecord:
    t: int
    rml_loss: float
    surrogate: float
    updated: bool
    w_norm: float  # norm of the iterate used to rank this round
    m: int
    k: int
    v_max: float  # nan when the round's weights are all zero


@dataclass
class TrainLog:
    measure: str
    records: list = field(default_factory=list)
    final: OnlineState | None = None

    @property
    def w(self):
        return self.final.w

    @property
    def cumulative_loss(self):
        return float(sum(r.rml_loss for r in self.records))

    def cumulative_at(self, T):
        """Cumulative measure loss after the first ``T`` rounds."""
        return float(sum(r.rml_loss for r in self.records[:T]))

    @property
    def update_rounds(self):
        return [r.t for r in self.records if r.updated]

    @property
    def v_max(self):
        vals = [r.v_max for r in self.records if not np.isnan(r.v_max)]
        return max(vals) if vals else 1.0

    @property
    def m_max(self):
        return max(r.m for r in self.records)

    @property
    def k_max(self):
        return max(r.k for r in self.records)

    def to_csv(self, target):
        """Columns: t, rml_loss, surrogate, updated, w_norm."""
        if isinstance(target, (str, os.PathLike)):
            with open(target, "w", newline="", encoding="utf-8") as fh:
                self.to_csv(fh)
            return
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["t", "rml_loss", "surrogate", "updated", "w_norm"])
        for r in self.records:
            writer.writerow(
                [r.t, repr(r.rml_loss), repr(r.surrogate), int(r.updated), repr(r.w_norm)]
            )

    def csv_text(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def surrogate_f_t(w, q, measure, w_t=None, delta=1.0):
    """The round function: SLAM loss at ``w`` if the ranking made by ``w_t``
    has nonzero measure loss, else 0. ``w_t`` defaults to ``w``."""
    measure = as_measure(measure)
    measure.check(q.R)
    ref = w if w_t is None else w_t
    if measure.loss(q.scores(ref), q.R) == 0.0:
        return 0.0
    return slam_loss(q.scores(w), q.R, weights_for(measure, q.R), delta=delta)


def step(state, q, measure, delta=1.0):
    """Advance one round; returns ``(new_state, RoundRecord)``."""
    measure = as_measure(measure)
    measure.check(q.R)
    if state.w.shape != (q.d,):
        raise DimensionError(f"state has d={state.w.size}, query has d={q.d}")
    s = q.X @ state.w
    rml = measure.loss(s, q.R)
    v = weights_for(measure, q.R)
    vmax = np.nan if v.degenerate else v_max_ratio(v)
    if rml != 0.0:
        f, g = slam_loss_and_grad(s, q.R, v, delta=delta)
        w_next = state.w - q.X.T @ g
        updated = True
    else:
        f, w_next, updated = 0.0, state.w, False
    rec = RoundRecord(
        t=state.t + 1,
        rml_loss=rml,
        surrogate=f,
        updated=updated,
        w_norm=float(np.linalg.norm(state.w)),
        m=q.m,
        k=measure.cutoff(q.m),
        v_max=vmax,
    )
    new = OnlineState(
        w=w_next,
        t=state.t + 1,
        cum_rml=state.cum_rml + rml,
        cum_surrogate=state.cum_surrogate + f,
        n_updates=state.n_updates + int(updated),
    )
    return new, rec


def run(data, measure, delta=1.0):
    """Run the learner over ``data`` from ``w_1 = 0``."""
    measure = as_measure(measure)
    queries = list(data)
    if not queries:
        raise ParameterError("the stream is empty")
    state = OnlineState.initial(queries[0].d)
    log = TrainLog(measure.tag)
    for q in queries:
        state, rec = step(state, q, measure, delta)
        log.records.append(rec)
    log.final = state
    return log


def cumulative_bound(sum_f_u, norm_u, m, R_X, v_max):
    """``2 * sum_t f_t(u) + 4 ||u||^2 m R_X^2 v_max``."""
    for name, val in (("sum_f_u", sum_f_u), ("norm_u", norm_u), ("m", m), ("R_X", R_X), ("v_max", v_max)):
        if val < 0:
            raise ParameterError(f"{name} must be nonnegative")
    return 2.0 * sum_f_u + 4.0 * norm_u ** 2 * m * R_X ** 2 * v_max


def at_k_bound(sum_f_u, norm_u, k, R_X, v_max):
    """Truncated-NDCG version of :func:`cumulative_bound` (k replaces m)."""
    return cumulative_bound(sum_f_u, norm_u, k, R_X, v_max)


def margin_bound(gamma, m, R_X, v_max):
    """Loss bound ``4 m R_X^2 v_max / gamma^2`` for data separable with margin gamma."""
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    return 4.0 * m * R_X ** 2 * v_max / gamma ** 2


def subgradient_norm_check(q, w, measure, R_X=None, delta=1.0):
    """Return ``(||z||^2, 4 m R_X^2 v_max f_t(w))`` for one round at ``w``.

    For ``ndcg@k`` the list length m is replaced by the cutoff. ``R_X``
    defaults to the largest row norm of ``q.X``.
    """
    measure = as_measure(measure)
    s = q.scores(w)
    if measure.loss(s, q.R) == 0.0:
        return 0.0, 0.0
    v = weights_for(measure, q.R)
    f, g = slam_loss_and_grad(s, q.R, v, delta=delta)
    z = q.X.T @ g
    if R_X is None:
        R_X = float(np.sqrt((q.X * q.X).sum(axis=1)).max())
    size = measure.cutoff(q.m)
    return float(z @ z), 4.0 * size * R_X ** 2 * v_max_ratio(v) * f


@dataclass(frozen=True)
class BoundReport:
    comparator: str
    norm_u: float
    R_X: float
    m: int
    v_max: float
    sum_f_u: float
    bound: float
    observed: float
    measure: str = ""
    v_max_cap: float | None = None
    rounds: int = 0
    updates: int = 0

    @property
    def holds(self):
        return self.observed <= self.bound

    def to_record(self):
        return {
            "measure": self.measure,
            "comparator": self.comparator,
            "norm_u": self.norm_u,
            "R_X": self.R_X,
            "m": self.m,
            "v_max": self.v_max,
            "v_max_cap": self.v_max_cap,
            "sum_f_u": self.sum_f_u,
            "bound": self.bound,
            "observed": self.observed,
            "rounds": self.rounds,
            "updates": self.updates,
            "holds": self.holds,
        }

    def to_text(self):
        size = "k" if self.measure.startswith("ndcg@") else "m"
        lines = [
            f"measure          {self.measure}",
            f"comparator       {self.comparator}",
            f"rounds           {self.rounds}",
            f"updates          {self.updates}",
            f"||u||            {self.norm_u:.6g}",
            f"R_X              {self.R_X:.6g}",
            f"{size:<17}{self.m}",
            f"v_max            {self.v_max:.6g}",
        ]
        if self.v_max_cap is not None:
            lines.append(f"v_max cap        {self.v_max_cap:.6g}")
        lines += [
            f"sum f_t(u)       {self.sum_f_u:.6g}",
            f"bound            {self.bound:.6g}",
            f"cumulative loss  {self.observed:.6g}",
            f"holds            {'yes' if self.holds else 'NO'}",
        ]
        return "\n".join(lines)


def bound_report(log, data, u, comparator="u", delta=1.0):
    """Compare the log's cumulative loss with the bound at comparator ``u``.

    ``m`` (or k), ``R_X`` and ``v_max`` are the maxima over the stream.
    """
    measure = as_measure(log.measure)
    queries = list(data)
    if len(queries) != len(log.records):
        raise DimensionError("log and data cover different numbers of rounds")
    u = np.asarray(u, dtype=np.float64)
    sum_f = 0.0
    for q, rec in zip(queries, log.records):
        if rec.updated:
            sum_f += slam_loss(q.scores(u), q.R, weights_for(measure, q.R), delta=delta)
    R_X = max(float(np.sqrt((q.X * q.X).sum(axis=1)).max()) for q in queries)
    size = log.k_max if measure.kind == "ndcg@k" else log.m_max
    v_max = log.v_max
    bound = cumulative_bound(sum_f, float(np.linalg.norm(u)), size, R_X, v_max)
    cap = log.m_max / 2.0 if measure.kind == "map" else None
    return BoundReport(
        comparator=comparator,
        norm_u=float(np.linalg.norm(u)),
        R_X=R_X,
        m=size,
        v_max=v_max,
        sum_f_u=sum_f,
        bound=bound,
        observed=log.cumulative_loss,
        measure=measure.tag,
        v_max_cap=cap,
        rounds=len(log.records),
        updates=len(log.update_rounds),
    )
