import numpy as np
import pytest

from slamrank import QueryInstance
from slamrank.batch import BatchConfig, auto_lambda, fit, objective
from slamrank.data import Dataset, SyntheticSpec, generate_synthetic
from slamrank.errors import EmptyDatasetError, ParameterError
from slamrank.surrogate import weights_ndcg


@pytest.fixture(scope="module")
def noisy():
    spec = SyntheticSpec(n=100, m=5, d=5, gamma=0.0, grades=(0, 1, 2), noise=0.3, seed=4)
    return generate_synthetic(spec).dataset


@pytest.fixture(scope="module")
def separable():
    return generate_synthetic(SyntheticSpec(n=60, m=5, d=4, gamma=0.5, seed=1))


def ball_sample(rng, d, B):
    x = rng.standard_normal(d)
    return x / np.linalg.norm(x) * B * rng.random() ** (1 / d)


def test_auto_lambda_examples():
    assert auto_lambda(100, 1, 2) == pytest.approx(0.5443311, abs=1e-7)
    assert auto_lambda(1, 1, 1) == pytest.approx(0.9428090, abs=1e-7)
    ratio = auto_lambda(400, 1, 2) / auto_lambda(100, 1, 2)
    assert 0.5 < ratio < 0.55
    for bad in [(0, 1, 1), (5, 0, 1), (5, 1, -1)]:
        with pytest.raises(ParameterError):
            auto_lambda(*bad)


def test_objective_at_zero(noisy):
    # at s = 0 every active inner max equals delta = 1
    expect = np.mean([
        sum(v for v, g in zip(weights_ndcg(q.R).v, q.R) if g > q.R.min()) for q in noisy
    ])
    assert objective(np.zeros(noisy.d), noisy, 3.7) == pytest.approx(expect, abs=1e-12)


def test_objective_separating_direction(separable):
    ds, u = separable.dataset, separable.u_star
    w = u / 0.5  # requested margin; the realized one is 1e-9 larger
    assert objective(w, ds, 0.0) == 0.0
    for t in (1.0, 2.0, 10.0):
        assert objective(t * w, ds, 0.0) <= objective(w, ds, 0.0)
    w_half = 0.5 * w
    vals = [objective(t * w_half, ds, 0.0) for t in (1.0, 1.5, 3.0)]
    assert vals == sorted(vals, reverse=True)


def test_objective_errors():
    with pytest.raises(EmptyDatasetError):
        objective(np.zeros(2), Dataset([], d=2), 0.1)
    q = Dataset([QueryInstance([[1.0]], [1])])
    with pytest.raises(ParameterError):
        objective(np.zeros(1), q, -1.0)


def test_config_validation():
    for kw in ({"B": 0}, {"epochs": 0}, {"lam": -1.0}, {"lam": "often"}, {"delta": 0}):
        with pytest.raises(ParameterError):
            BatchConfig(**kw)


def test_fit_separable_reaches_zero_training_loss(separable):
    res = fit(separable.dataset, BatchConfig(lam=0.0, B=50, epochs=40, measure="map"))
    assert res.train.metric == 1.0


def test_fit_degenerate_query_stays_at_zero():
    ds = Dataset([QueryInstance(np.eye(3), [1, 1, 1])])
    res = fit(ds, BatchConfig(lam=0.5, B=10, epochs=5))
    assert res.train.surrogate == 0.0
    assert np.all(res.w == 0)


def test_fit_invariants(noisy):
    cfg = BatchConfig(lam=0.1, B=5, epochs=50, seed=0)
    res = fit(noisy, cfg)
    assert np.linalg.norm(res.w) <= cfg.B
    assert res.objective <= objective(np.zeros(noisy.d), noisy, 0.1) + 1e-9
    assert res.objective == pytest.approx(objective(res.w, noisy, 0.1), abs=1e-12)
    assert np.all(np.diff(res.trace) <= 1e-6)
    assert len(res.trace) == len(res.raw_trace) == 50

    rng = np.random.default_rng(0)
    best_random = min(objective(ball_sample(rng, noisy.d, cfg.B), noisy, 0.1) for _ in range(100))
    assert res.objective <= best_random + 1e-6


def test_fit_tiny_ball_is_feasible(noisy):
    res = fit(noisy, BatchConfig(lam=0.0, B=1e-3, epochs=3))
    assert np.linalg.norm(res.w) <= 1e-3


def test_seeds_agree_on_convex_objective(noisy):
    objs = [fit(noisy, BatchConfig(lam=0.1, B=5, epochs=50, seed=s)).objective for s in range(3)]
    assert max(objs) - min(objs) < 1e-3


def test_fit_deterministic(noisy):
    a = fit(noisy, BatchConfig(lam="auto", B=5, epochs=5, seed=11))
    b = fit(noisy, BatchConfig(lam="auto", B=5, epochs=5, seed=11))
    assert a.trace == b.trace and np.array_equal(a.w, b.w)
    assert a.lam == auto_lambda(len(noisy), 5, 2 * noisy.stats.R_X)


def test_fit_test_summary(noisy):
    res = fit(noisy[:70], BatchConfig(lam=0.1, B=5, epochs=5), test=noisy[70:])
    assert res.test.n == 30 and 0 <= res.test.metric <= 1
