"""Seeded experiment drivers shared by the acceptance suite and the benchmark."""

from dataclasses import dataclass

import numpy as np

from . import online
from .batch import BatchConfig, fit
from .data import SyntheticSpec, generate_synthetic


@dataclass(frozen=True)
class GapConfig:
    d: int = 50
    noise: float = 0.3
    grades: tuple = (0, 1, 2)
    B: float = 10.0
    epochs: int = 30
    n_test: int = 3000
    measure: str = "ndcg"


def generalization_gap(n, m, seed, cfg=GapConfig()):
    """Held-out minus training mean SLAM loss of the batch solution.

    Training and held-out queries come from one generated pool (margin-free,
    noisy linear grades), so both follow the same distribution.
    """
    spec = SyntheticSpec(
        n=n + cfg.n_test, m=m, d=cfg.d, gamma=0.0, grades=cfg.grades,
        noise=cfg.noise, seed=seed,
    )
    pool = generate_synthetic(spec).dataset
    train, test = pool[:n], pool[n:]
    res = fit(train, BatchConfig(lam="auto", B=cfg.B, epochs=cfg.epochs,
                                 measure=cfg.measure, seed=seed), test=test)
    return res.test.surrogate - res.train.surrogate


def median_gaps(pairs, seeds, cfg=GapConfig()):
    """Median gap over ``seeds`` for each ``(n, m)`` in ``pairs``."""
    return {
        (n, m): float(np.median([generalization_gap(n, m, s, cfg) for s in seeds]))
        for n, m in pairs
    }


@dataclass(frozen=True)
class MarginRun:
    log: online.TrainLog
    report: online.BoundReport
    margin_bound: float


def separable_online_run(measure, n=10_000, m=5, d=10, gamma=1.0, seed=0):
    """Online learner on margin-separable data, compared at ``u* / gamma``."""
    res = generate_synthetic(SyntheticSpec(n=n, m=m, d=d, gamma=gamma, seed=seed))
    log = online.run(res.dataset, measure)
    u = res.u_star / gamma
    report = online.bound_report(log, res.dataset, u, comparator="u*/gamma")
    size = report.m
    return MarginRun(log, report, online.margin_bound(gamma, size, report.R_X, report.v_max))
