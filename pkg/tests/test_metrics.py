import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slamrank.errors import (
    DimensionError,
    InvalidCutoffError,
    InvalidGradeError,
    InvalidRankError,
    InvalidRelevanceError,
)
from slamrank.metrics import (
    check_relevance,
    discount,
    gain,
    ideal_dcg,
    map_score,
    ndcg,
    ndcg_at_k,
    permutation_from_scores,
)


def ref_ndcg(s, R):
    # straight from the definition, ties by index
    order = sorted(range(len(s)), key=lambda i: (-s[i], i))
    dcg = sum((2 ** R[d] - 1) / math.log2(p + 2) for p, d in enumerate(order))
    best = sum((2 ** g - 1) / math.log2(p + 2) for p, g in enumerate(sorted(R, reverse=True)))
    return 1.0 if best == 0 else dcg / best


def ref_map(s, R):
    order = sorted(range(len(s)), key=lambda i: (-s[i], i))
    hits, total = 0, 0.0
    for pos, doc in enumerate(order, start=1):
        if R[doc]:
            hits += 1
            total += hits / pos
    return 1.0 if hits == 0 else total / hits


class TestGainDiscount:
    @pytest.mark.parametrize("r, g", [(0, 0.0), (2, 3.0), (4, 15.0)])
    def test_gain(self, r, g):
        assert gain(r) == g

    @pytest.mark.parametrize("p, d", [(1, 1.0), (3, 0.5)])
    def test_discount_exact(self, p, d):
        assert discount(p) == d

    def test_discount_two(self):
        assert discount(2) == pytest.approx(1 / math.log2(3), abs=1e-15)
        assert discount(2) == pytest.approx(0.6309297, abs=1e-7)

    def test_errors(self):
        with pytest.raises(InvalidGradeError):
            gain(-1)
        with pytest.raises(InvalidRankError):
            discount(0)


@pytest.mark.parametrize(
    "s, order",
    [((3, 2, 1), (0, 1, 2)), ((1, 2, 3), (2, 1, 0)), ((2, 2, 5), (2, 0, 1))],
)
def test_permutation_examples(s, order):
    perm = permutation_from_scores(s)
    assert tuple(perm.order) == order
    np.testing.assert_array_equal(perm.inverse[perm.order], np.arange(len(s)))


@pytest.mark.parametrize(
    "R, k, value",
    [((1, 0), "all", 1.0), ((0, 0, 0), "all", 0.0), ((2, 1), "all", 3 + 1 / math.log2(3))],
)
def test_ideal_dcg_examples(R, k, value):
    assert ideal_dcg(R, k) == pytest.approx(value, abs=1e-15)


def test_ideal_dcg_bad_cutoff():
    with pytest.raises(InvalidCutoffError):
        ideal_dcg([1, 0], 3)


def test_ndcg_examples():
    assert ndcg([2, 1], [1, 0]) == 1.0
    assert ndcg([0, 1], [1, 0]) == pytest.approx(0.6309297535714575, abs=1e-15)
    assert ndcg([5, 1], [0, 0]) == 1.0
    with pytest.raises(DimensionError):
        ndcg([1, 2, 3], [1, 0])


def test_ndcg_at_k_examples():
    assert ndcg_at_k([2, 1, 0], [1, 1, 0], 2) == 1.0
    assert ndcg_at_k([0, 1, 2], [1, 0, 0], 1) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(InvalidCutoffError):
        ndcg_at_k([0, 1], [1, 0], 3)
    with pytest.raises(InvalidCutoffError):
        ndcg_at_k([0, 1], [1, 0], 0)


def test_map_examples():
    assert map_score([3, 2, 1], [1, 1, 0]) == 1.0
    assert map_score([3, 2, 1], [1, 0, 1]) == pytest.approx(0.5 * (1 + 2 / 3), abs=1e-15)
    assert map_score([1, 2, 3], [1, 1, 0]) == pytest.approx(0.5 * (0.5 + 2 / 3), abs=1e-15)
    assert map_score([1, 2], [0, 0]) == 1.0
    with pytest.raises(InvalidRelevanceError):
        map_score([1, 2], [2, 0])


def test_relevance_validation():
    with pytest.raises(InvalidGradeError):
        check_relevance([1.5, 0])
    with pytest.raises(InvalidGradeError):
        check_relevance([5, 0], max_grade=4)
    with pytest.raises(DimensionError):
        check_relevance([])
    assert check_relevance(np.array([1.0, 0.0])).dtype == np.int64


def test_ndcg_at_k_full_cutoff_equals_ndcg_on_sorted_grades(rng):
    for _ in range(200):
        m = int(rng.integers(1, 9))
        R = np.sort(rng.integers(0, 5, size=m))[::-1]
        s = rng.standard_normal(m)
        assert ndcg_at_k(s, R, m) == pytest.approx(ndcg(s, R), abs=1e-12)


def test_ndcg_at_k_ignores_which_tied_document_is_which():
    # swapping two equal-grade documents with their scores changes nothing
    s = np.array([0.3, 2.0, 1.0, -1.0])
    R = np.array([1, 1, 2, 0])
    swapped = ndcg_at_k(s[[1, 0, 2, 3]], R[[1, 0, 2, 3]], 2)
    assert ndcg_at_k(s, R, 2) == swapped


def test_ideal_dcg_matches_enumeration_small():
    for R in itertools.product(range(3), repeat=4):
        best = max(
            sum((2 ** R[d] - 1) / math.log2(p + 2) for p, d in enumerate(perm))
            for perm in itertools.permutations(range(4))
        )
        assert abs(ideal_dcg(R) - best) <= 1e-12


scores = st.lists(st.integers(-3, 3), min_size=1, max_size=7)


@settings(max_examples=300, deadline=None)
@given(data=st.data())
def test_metrics_match_reference(data):
    s = data.draw(scores)
    m = len(s)
    R = data.draw(st.lists(st.integers(0, 4), min_size=m, max_size=m))
    Rb = [g % 2 for g in R]
    assert ndcg(s, R) == pytest.approx(ref_ndcg(s, R), abs=1e-12)
    assert map_score(s, Rb) == pytest.approx(ref_map(s, Rb), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(data=st.data())
def test_joint_permutation_invariance(data):
    m = data.draw(st.integers(1, 7))
    # distinct scores: with ties the index rule is not permutation invariant
    s = data.draw(st.lists(st.floats(-5, 5), min_size=m, max_size=m, unique=True))
    R = data.draw(st.lists(st.integers(0, 4), min_size=m, max_size=m))
    perm = data.draw(st.permutations(range(m)))
    s, R = np.array(s), np.array(R)
    assert ndcg(s[perm], R[perm]) == pytest.approx(ndcg(s, R), abs=1e-12)
    Rb = R % 2
    assert map_score(s[perm], Rb[perm]) == pytest.approx(map_score(s, Rb), abs=1e-12)
    k = data.draw(st.integers(1, m))
    assert ndcg_at_k(s[perm], R[perm], k) == pytest.approx(ndcg_at_k(s, R, k), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    R=st.lists(st.integers(0, 4), min_size=1, max_size=8),
    c=st.floats(1e-3, 1e3),
)
def test_range_sorted_and_scale(R, c):
    R = np.array(R)
    s = np.random.default_rng(len(R)).standard_normal(len(R))
    for v in (ndcg(s, R), map_score(s, R % 2), ndcg_at_k(s, R, len(R))):
        assert 0.0 <= v <= 1.0
    # scores that sort by grade give a perfect value, exactly
    assert ndcg(R.astype(float), R) == 1.0
    assert map_score((R % 2).astype(float), R % 2) == 1.0
    np.testing.assert_array_equal(
        permutation_from_scores(c * s).order, permutation_from_scores(s).order
    )
