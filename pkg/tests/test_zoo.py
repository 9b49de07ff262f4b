import math

import numpy as np
import pytest

from slamrank import zoo
from slamrank.errors import InvalidRelevanceError, ParameterError, SizeError
from slamrank.zoo import SurrogateKind

KINDS = list(SurrogateKind)


def draw(kind, rng, m_max=8):
    m = int(rng.integers(2, m_max + 1))
    return rng.standard_normal(m) * rng.choice([0.1, 1.0, 10.0]), kind.sample_grades(m, rng)


class TestRankSVM:
    def test_examples(self):
        loss, g = zoo.ranksvm_loss_and_grad([2, 0], [1, 0])
        assert loss == 0 and np.all(g == 0)
        loss, g = zoo.ranksvm_loss_and_grad([0, 1], [1, 0])
        assert loss == 2.0
        np.testing.assert_array_equal(g, [-1, 1])

    @pytest.mark.parametrize("m", [2, 5, 11])
    def test_all_but_one_relevant_below(self, m):
        R = [1] * (m - 1) + [0]
        s = [0.0] * (m - 1) + [5.0]
        assert np.abs(zoo.ranksvm_grad(s, R)).sum() == 2 * (m - 1)

    def test_binary_only(self):
        with pytest.raises(InvalidRelevanceError):
            zoo.ranksvm_loss([0, 1], [2, 0])


class TestListNet:
    def test_matched_distributions(self):
        R = np.array([3, 0, 1])
        np.testing.assert_allclose(zoo.listnet_grad(R.astype(float) + 4.2, R), 0, atol=1e-15)

    def test_two_documents(self):
        p1 = math.e / (1 + math.e)
        np.testing.assert_allclose(zoo.listnet_grad([0, 0], [1, 0]), [0.5 - p1, 0.5 - (1 - p1)], atol=1e-15)

    def test_l1_is_distance_between_distributions(self, rng):
        for _ in range(500):
            s, R = draw(SurrogateKind.LISTNET, rng)
            g = zoo.listnet_grad(s, R)
            q = np.exp(s - s.max()) / np.exp(s - s.max()).sum()
            p = zoo.listnet_target(R)
            assert np.abs(g).sum() == pytest.approx(2 - 2 * np.minimum(p, q).sum(), abs=1e-12)
            assert np.abs(g).sum() <= 2

    def test_finite_differences(self, rng):
        h = 1e-6
        for _ in range(300):
            s, R = draw(SurrogateKind.LISTNET, rng)
            u = rng.standard_normal(len(s))
            fd = (zoo.listnet_loss(s + h * u, R) - zoo.listnet_loss(s - h * u, R)) / (2 * h)
            assert fd == pytest.approx(zoo.listnet_grad(s, R) @ u, abs=1e-5)

    def test_stable_for_large_scores(self):
        loss, g = zoo.listnet_loss_and_grad([1000.0, -1000.0], [0, 4])
        assert np.isfinite(loss) and np.all(np.isfinite(g))


class TestStructMargin:
    def test_sorted_with_big_margins(self):
        loss, g = zoo.struct_margin_loss_and_grad([30.0, 20.0, 10.0, 0.0], [3, 2, 1, 0])
        assert loss == 0 and np.all(g == 0)

    @pytest.mark.parametrize("m", range(2, 9))
    def test_reversal(self, m):
        R = np.arange(m)[::-1]  # document 0 is best
        s = 100.0 * np.arange(m)  # scored backwards
        g = zoo.struct_margin_grad(s, R)
        assert sorted(np.abs(g)) == sorted(abs(m + 1 - 2 * i) for i in range(1, m + 1))
        assert np.abs(g).sum() == m * m // 2
        if m == 2:
            np.testing.assert_array_equal(g, [-1, 1])

    def test_delta_is_one_minus_ndcg(self):
        from slamrank.metrics import ndcg

        # zero scores: the max picks the ranking with the largest NDCG loss
        R = np.array([0, 3, 1])
        loss = zoo.struct_margin_loss(np.zeros(3), R)
        assert loss == pytest.approx(1 - ndcg(-R.astype(float), R), abs=1e-12)

    def test_errors(self):
        with pytest.raises(InvalidRelevanceError):
            zoo.struct_margin_loss([0, 1], [1, 1])
        with pytest.raises(SizeError):
            zoo.struct_margin_loss(np.zeros(9), np.arange(9))


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_midpoint_convexity(kind, rng):
    trials = 2000 if kind is SurrogateKind.STRUCTMARGIN else 10_000
    for _ in range(trials):
        a, R = draw(kind, rng)
        b = rng.standard_normal(len(R)) * 3
        lhs = kind.loss((a + b) / 2, R)
        rhs = (kind.loss(a, R) + kind.loss(b, R)) / 2
        assert lhs <= rhs + 1e-9 * max(1.0, abs(rhs))


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_subgradient_inequality(kind, rng):
    for _ in range(1000):
        s, R = draw(kind, rng)
        s2 = s + rng.choice([1e-3, 1.0, 10.0]) * rng.standard_normal(len(s))
        f, g = kind.loss_and_grad(s, R)
        assert kind.loss(s2, R) >= f + g @ (s2 - s) - 1e-9 * max(1.0, abs(f))


def test_kind_parsing():
    assert SurrogateKind.parse("RankSVM") is SurrogateKind.RANKSVM
    with pytest.raises(ParameterError):
        SurrogateKind.parse("lambdamart")


def test_profiles_bounded_or_growing():
    grid = [5, 10, 20, 40]
    for kind in ("slam-ndcg", "slam-map", "listnet"):
        prof = zoo.lipschitz_profile(kind, grid, trials=50, seed=0)
        assert all(0 <= v <= 2 for v in prof.sups)
    svm = zoo.lipschitz_profile("ranksvm", grid, trials=50, seed=0)
    assert svm.sups == sorted(svm.sups) and svm.sups[0] < svm.sups[-1]
    sm = zoo.lipschitz_profile("structmargin", range(2, 9), trials=10, seed=0)
    assert sm.sups == sorted(sm.sups)
    assert sm.sups == [m * m // 2 for m in range(2, 9)]


def test_slam_ndcg_supremum_is_attained():
    # a lone relevant document scored last: 2 v_1 = 2 (1 - 1/log2(m + 1))
    prof = zoo.lipschitz_profile("slam-ndcg", [5, 10, 20, 40], trials=1, seed=0)
    for m, v in zip(prof.m_values, prof.sups):
        assert v == pytest.approx(2 * (1 - 1 / math.log2(m + 1)), abs=1e-12)


def test_profile_csv_and_validation(tmp_path):
    prof = zoo.lipschitz_profile("listnet", [3, 6], trials=5, seed=1)
    lines = prof.csv_text().splitlines()
    assert lines[0] == "kind,m,sup_l1,trials" and len(lines) == 3
    assert lines[1].startswith("listnet,3,")
    prof.to_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines() == lines
    assert np.isfinite(prof.exponent)
    with pytest.raises(ParameterError):
        zoo.lipschitz_profile("listnet", [3], trials=0)
    with pytest.raises(SizeError):
        zoo.lipschitz_profile("structmargin", [9])
    a = zoo.lipschitz_profile("ranksvm", [4, 8], trials=20, seed=5)
    b = zoo.lipschitz_profile("ranksvm", [4, 8], trials=20, seed=5)
    assert a.records == b.records
