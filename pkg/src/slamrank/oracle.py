"""Brute-force and adversarial checks of the closed-form claims.

Each ``verify_*`` function returns a :class:`VerificationReport`. A trial's
margin is LHS minus RHS of the inequality being checked, so negative margins
beyond the tolerance are violations. The worst margin is kept even when
nothing fails.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError, SizeError
from .measures import MAP, NDCG, RankingMeasure, as_measure
from .metrics import MAX_GRADE, check_relevance, ideal_dcg, map_score

TOL = 1e-9
EXACT = 1e-12
BRUTE_MAX_M = 8
SCALES = (1e-3, 1.0, 1e3)
_CHUNK = 50_000


@dataclass
class VerificationReport:
    property: str
    trials: int = 0
    violations: int = 0
    worst_margin: float = math.inf
    witness: dict | None = None

    @property
    def passed(self):
        return self.violations == 0

    def absorb(self, margins, tol, witness_fn):
        """Fold a batch of margins in; ``tol`` is a scalar or per-trial array."""
        margins = np.asarray(margins, dtype=np.float64)
        if margins.size == 0:
            return self
        self.trials += int(margins.size)
        bad = margins < -np.asarray(tol)
        self.violations += int(bad.sum())
        j = int(np.argmin(margins))
        if margins[j] < self.worst_margin:
            self.worst_margin = float(margins[j])
            if bad[j]:
                self.witness = witness_fn(j)
        return self

    def merge(self, other):
        out = VerificationReport(
            self.property,
            self.trials + other.trials,
            self.violations + other.violations,
            min(self.worst_margin, other.worst_margin),
        )
        first = self if self.worst_margin <= other.worst_margin else other
        out.witness = first.witness or self.witness or other.witness
        return out

    def to_record(self):
        return {
            "property": self.property,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
        }

    def to_text(self):
        status = "PASS" if self.passed else "FAIL"
        line = (
            f"{status} {self.property}: trials={self.trials} "
            f"violations={self.violations} worst_margin={self.worst_margin:.6g}"
        )
        if self.witness is not None and not self.passed:
            line += f"\n  witness: {self.witness}"
        return line


# ----------------------------------------------------------- brute force

def brute_ideal_dcg(R, k="all"):
    """Best DCG over all m! orderings, by enumeration (m <= 8)."""
    R = check_relevance(R)
    m = R.size
    if m > BRUTE_MAX_M:
        raise SizeError(f"enumeration is limited to m <= {BRUTE_MAX_M}")
    k = m if k in ("all", None) else int(k)
    if not 1 <= k <= m:
        raise ParameterError(f"cutoff must be in 1..{m}")
    best = 0.0
    disc = [1.0 / math.log2(i + 2) for i in range(k)]
    for perm in itertools.permutations(range(m), k):
        val = 0.0
        for pos, doc in enumerate(perm):
            val += (2.0 ** int(R[doc]) - 1.0) * disc[pos]
        best = max(best, val)
    return best


def _check_map_args(m, r, p):
    if not (isinstance(m, (int, np.integer)) and isinstance(r, (int, np.integer))):
        raise ParameterError("m and r must be integers")
    if not (0 <= p < r <= m):
        raise ParameterError(f"need 0 <= p < r <= m, got m={m}, r={r}, p={p}")


def worst_case_map_loss(m, r, blocked_prefix=0):
    """Largest MAP loss when all irrelevant documents sit above every
    relevant one except the first ``blocked_prefix``."""
    p = blocked_prefix
    _check_map_args(m, r, p)
    tail = sum(i / (m - r + i) for i in range(p + 1, r + 1))
    return 1.0 - (p + tail) / r


def enumerate_worst_map_loss(m, r, blocked_prefix=0):
    """Same quantity as :func:`worst_case_map_loss`, by scanning rankings.

    Documents ``0..r-1`` are relevant. Every ranking is scored in which the
    first p relevant documents fill the top p places and every irrelevant
    document outranks the other relevant ones.
    """
    p = blocked_prefix
    _check_map_args(m, r, p)
    if m > 6:
        raise SizeError("enumeration is limited to m <= 6")
    R = np.array([1] * r + [0] * (m - r))
    worst = -math.inf
    for perm in itertools.permutations(range(m)):
        rank = np.empty(m, dtype=int)
        rank[list(perm)] = np.arange(m)
        if sorted(rank[:p]) != list(range(p)):
            continue
        if p < r and rank[r:].size and rank[r:].max() > rank[p:r].min():
            continue
        s = -rank.astype(np.float64)
        worst = max(worst, 1.0 - map_score(s, R))
    return worst


# ------------------------------------------------------------- sampling

def _gain_rows(measure, S, R, K):
    if measure.kind == "ndcg":
        return kernels.ndcg_rows(S, R)
    if measure.kind == "map":
        return kernels.map_rows(S, R)
    return kernels.ndcg_at_k_rows(S, R, K)


def _top_grade(measure):
    return 1 if measure.kind == "map" else MAX_GRADE


def _random_scores(rng, n, m):
    """Standard-normal scores; every other row rounded to force ties."""
    S = rng.standard_normal((n, m))
    S[::2] = np.round(S[::2])
    return S


def _ms(rng, trials, m_max):
    ms = rng.integers(2, m_max + 1, size=trials)
    return [(m, int((ms == m).sum())) for m in range(2, m_max + 1)]


def weak_orderings(m):
    """All score patterns of m documents up to monotone relabeling, ties included."""
    out = []
    for lv in itertools.product(range(m), repeat=m):
        if set(lv) == set(range(max(lv) + 1)):
            out.append(lv)
    return np.array(out, dtype=np.float64)


def _grade_grid(m, top):
    return np.array(list(itertools.product(range(top + 1), repeat=m)), dtype=np.int64)


def _witness(S, R, K, measure):
    def fn(j):
        w = {"measure": measure.tag, "s": S[j].tolist(), "R": R[j].tolist()}
        if measure.kind == "ndcg@k":
            w["k"] = int(K[j])
        return w

    return fn


def _bound_batch(report, measure, S, R, K, weight_scale):
    for a in range(0, S.shape[0], _CHUNK):
        s, r, k = S[a : a + _CHUNK], R[a : a + _CHUNK], K[a : a + _CHUNK]
        V = kernels.weights_rows(r, measure.code, k) * weight_scale
        slam, _ = kernels.slam_rows(s, r, V, 1.0)
        induced = 1.0 - _gain_rows(measure, s, r, k)
        report.absorb(slam - induced, TOL, _witness(s, r, k, measure))


def verify_upper_bound(measure=NDCG, trials=10_000, m_max=8, seed=0, exhaustive_m=5,
                       weight_scale=1.0):
    """SLAM loss minus measure-induced loss must be >= -1e-9.

    ``trials`` random instances with m uniform on 2..m_max, plus every
    ordering with ties of every grade vector for m <= ``exhaustive_m``
    (grades 0..2, or 0..1 for MAP) at score scales 1e-3, 1 and 1e3. For
    ``ndcg@k`` the random part uses the measure's own cutoff (clamped to m)
    and the exhaustive part every cutoff 1..m. ``weight_scale`` multiplies
    the weights and exists only to build negative controls.
    """
    measure = as_measure(measure)
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    rep = VerificationReport(f"upper-bound[{measure.tag}]")
    top = _top_grade(measure)
    for m, n in _ms(rng, trials, m_max):
        if n == 0:
            continue
        S = _random_scores(rng, n, m)
        R = rng.integers(0, top + 1, size=(n, m))
        K = np.full(n, measure.cutoff(m), dtype=np.int64)
        _bound_batch(rep, measure, S, R, K, weight_scale)
    for m in range(2, min(exhaustive_m, m_max) + 1):
        L = weak_orderings(m)
        G = _grade_grid(m, min(top, 2))
        S = np.concatenate([np.repeat(L * c, len(G), axis=0) for c in SCALES])
        R = np.tile(G, (len(L) * len(SCALES), 1))
        cutoffs = range(1, m + 1) if measure.kind == "ndcg@k" else [m]
        for k in cutoffs:
            K = np.full(S.shape[0], k, dtype=np.int64)
            _bound_batch(rep, measure, S, R, K, weight_scale)
    return rep


def verify_weight_sums(m_max=8, max_grade=MAX_GRADE):
    """Exhaustive weight-sum checks over every grade vector with m <= m_max.

    NDCG and MAP weights must sum to at most 1; truncated-NDCG weights must
    sum to exactly 1 whenever some grade is positive (every cutoff tried).
    """
    reps = []
    for measure, top in ((NDCG, max_grade), (MAP, 1)):
        rep = VerificationReport(f"weight-sum[{measure.tag}] <= 1")
        for m in range(1, m_max + 1):
            G = _grade_grid(m, top)
            V = kernels.weights_rows(G, measure.code, np.zeros(len(G), dtype=np.int64))
            rep.absorb(1.0 - V.sum(axis=1), EXACT, lambda j, G=G: {"R": G[j].tolist()})
        reps.append(rep)
    rep = VerificationReport("weight-sum[ndcg@k] = 1")
    for m in range(1, m_max + 1):
        G = _grade_grid(m, max_grade)
        G = G[G.max(axis=1) > 0]
        for k in range(1, m + 1):
            K = np.full(len(G), k, dtype=np.int64)
            V = kernels.weights_rows(G, kernels.NDCG_K, K)
            rep.absorb(
                -np.abs(V.sum(axis=1) - 1.0), EXACT, lambda j, G=G, k=k: {"R": G[j].tolist(), "k": k}
            )
    reps.append(rep)
    return reps


def verify_ideal_dcg(m_max=6, max_grade=2):
    """Sorted ideal DCG against exhaustive search, every R and every cutoff."""
    rep = VerificationReport("ideal-dcg = brute force")
    for m in range(1, m_max + 1):
        perms = np.array(list(itertools.permutations(range(m))))
        disc = 1.0 / np.log2(np.arange(2, m + 2))
        for R in itertools.product(range(max_grade + 1), repeat=m):
            R = np.array(R)
            gains = (2.0 ** R[perms] - 1.0) * disc
            cum = np.cumsum(gains, axis=1).max(axis=0)
            diffs = [-abs(ideal_dcg(R, k) - cum[k - 1]) for k in range(1, m + 1)]
            rep.absorb(diffs, EXACT, lambda j, R=R: {"R": R.tolist(), "k": j + 1})
    return rep


def verify_map_tightness(m_max=12):
    """MAP weights sum to the worst-case MAP loss, for every (m, r)."""
    rep = VerificationReport("map weight sum = worst-case loss")
    for m in range(1, m_max + 1):
        for r in range(1, m + 1):
            R = np.array([[1] * r + [0] * (m - r)], dtype=np.int64)
            total = kernels.weights_rows(R, kernels.MAP, np.zeros(1, dtype=np.int64))[0].sum()
            diff = abs(total - worst_case_map_loss(m, r, 0))
            rep.absorb([-diff], EXACT, lambda j, m=m, r=r: {"m": m, "r": r})
    return rep


# --------------------------------------------------- convexity and subgradients

def _draw_pairs(rng, measure, n, m):
    R = rng.integers(0, _top_grade(measure) + 1, size=(n, m))
    K = np.full(n, measure.cutoff(m), dtype=np.int64)
    V = kernels.weights_rows(R, measure.code, K)
    return R, V


SLAM_MEASURES = (NDCG, MAP, RankingMeasure("ndcg@k", 3))


def verify_subgradient(trials=10_000, seed=0, m_max=8, measures=SLAM_MEASURES):
    """``phi(s') >= phi(s) + <g, s' - s>`` for the returned subgradient g.

    ``s' = s + t u`` with u standard normal and t drawn from {1e-3, 1, 1e3};
    the tolerance is 1e-9 relative to the size of the terms involved.
    """
    rng = np.random.default_rng(seed)
    reps = []
    for measure in map(as_measure, measures):
        rep = VerificationReport(f"subgradient[{measure.tag}]")
        for m, n in _ms(rng, trials, m_max):
            if n == 0:
                continue
            R, V = _draw_pairs(rng, measure, n, m)
            S = _random_scores(rng, n, m)
            t = rng.choice(SCALES, size=n)[:, None]
            S2 = S + t * rng.standard_normal((n, m))
            f1, g = kernels.slam_rows(S, R, V, 1.0)
            f2, _ = kernels.slam_rows(S2, R, V, 1.0)
            lin = (g * (S2 - S)).sum(axis=1)
            tol = TOL * np.maximum(1.0, np.maximum(np.abs(f2), np.abs(lin)))
            rep.absorb(f2 - f1 - lin, tol, lambda j, S=S, S2=S2, R=R: {
                "measure": measure.tag, "s": S[j].tolist(), "s2": S2[j].tolist(), "R": R[j].tolist()})
        reps.append(rep)
    return reps


def verify_convexity(trials=10_000, seed=0, m_max=8, measures=SLAM_MEASURES):
    """Midpoint convexity ``phi((a+b)/2) <= (phi(a) + phi(b)) / 2``."""
    rng = np.random.default_rng(seed)
    reps = []
    for measure in map(as_measure, measures):
        rep = VerificationReport(f"convexity[{measure.tag}]")
        for m, n in _ms(rng, trials, m_max):
            if n == 0:
                continue
            R, V = _draw_pairs(rng, measure, n, m)
            A = _random_scores(rng, n, m) * rng.choice(SCALES, size=n)[:, None]
            B = _random_scores(rng, n, m) * rng.choice(SCALES, size=n)[:, None]
            fa, _ = kernels.slam_rows(A, R, V, 1.0)
            fb, _ = kernels.slam_rows(B, R, V, 1.0)
            fm, _ = kernels.slam_rows(0.5 * (A + B), R, V, 1.0)
            tol = TOL * np.maximum(1.0, np.maximum(fa, fb))
            rep.absorb(0.5 * (fa + fb) - fm, tol, lambda j, A=A, B=B, R=R: {
                "measure": measure.tag, "a": A[j].tolist(), "b": B[j].tolist(), "R": R[j].tolist()})
        reps.append(rep)
    return reps


# ------------------------------------------------------------- dominance

def dominance_instance(m, r, i, epsilon, eta=1e-6):
    """Adversarial instance for MAP weights with coordinate ``i`` lowered.

    Documents ``0..r-1`` are relevant. Relevant documents before ``i`` score
    2, irrelevant ones score ``eta`` and relevant ones from ``i`` on score 0.
    Returns ``(reduced_slam_loss, map_loss)``.
    """
    if not 1 <= i <= r < m:
        raise ParameterError(f"need 1 <= i <= r < m, got m={m}, r={r}, i={i}")
    R = np.array([1] * r + [0] * (m - r), dtype=np.int64)
    s = np.zeros(m)
    s[: i - 1] = 2.0
    s[r:] = eta
    v = kernels.weights_rows(R[None, :], kernels.MAP, np.zeros(1, dtype=np.int64))[0].copy()
    v[i - 1] = max(0.0, v[i - 1] - epsilon)
    slam, _ = kernels.slam_rows(s[None, :], R[None, :], v[None, :], 1.0)
    return float(slam[0]), 1.0 - map_score(s, R)


def verify_dominance_map(m_max=8, epsilon=1e-3, eta=1e-6):
    """Lowering any one MAP weight by epsilon must break the MAP upper bound.

    Each (m, r, i) is a trial whose margin is ``map_loss - reduced_slam``;
    a trial counts as a violation of the property when that margin is not
    positive, that is, when the reduced weights still upper-bound the loss.
    """
    if epsilon < 0:
        raise ParameterError("epsilon must be nonnegative")
    rep = VerificationReport(f"dominance[map] eps={epsilon:g}")
    for m in range(2, m_max + 1):
        for r in range(1, m):
            for i in range(1, r + 1):
                slam, loss = dominance_instance(m, r, i, epsilon, eta)
                # negative tolerance: the margin has to clear +TOL, not -TOL
                rep.absorb([loss - slam], -TOL, lambda j, m=m, r=r, i=i: {"m": m, "r": r, "i": i})
    return rep


# ------------------------------------------------------------------ norms

def verify_norms(trials=10_000, seed=0, m_max=8, d_max=5, measures=SLAM_MEASURES,
                 weight_scale=1.0):
    """``||X^T g||^2 <= 4 m R_X^2 v_max f`` on random mistaken rounds.

    Rounds with zero measure loss are counted and pass trivially. For
    ``ndcg@k`` the cutoff replaces m. R_X is the instance's largest row norm.
    """
    rng = np.random.default_rng(seed)
    reps = []
    for measure in map(as_measure, measures):
        rep = VerificationReport(f"subgradient-norm[{measure.tag}]")
        top = _top_grade(measure)
        for m, n in _ms(rng, trials, m_max):
            if n == 0:
                continue
            d = int(rng.integers(1, d_max + 1))
            X = rng.standard_normal((n, m, d))
            W = rng.standard_normal((n, d))
            S = np.einsum("nmd,nd->nm", X, W)
            S[::2] = np.round(S[::2])  # ties, scores no longer X @ w but still valid
            R = rng.integers(0, top + 1, size=(n, m))
            K = np.full(n, measure.cutoff(m), dtype=np.int64)
            V = kernels.weights_rows(R, measure.code, K) * weight_scale
            f, g = kernels.slam_rows(S, R, V, 1.0)
            mistaken = (1.0 - _gain_rows(measure, S, R, K)) != 0.0
            z = np.einsum("nmd,nm->nd", X, g)
            lhs = np.where(mistaken, (z * z).sum(axis=1), 0.0)
            rx2 = (X * X).sum(axis=2).max(axis=1)
            top_v = V.max(axis=1)
            low_v = np.where(V > 0, V, np.inf).min(axis=1)
            vmax = np.where(top_v > 0, top_v / np.where(top_v > 0, low_v, 1.0), 1.0)
            rhs = np.where(mistaken, 4.0 * K * rx2 * vmax * f, 0.0)
            tol = TOL * np.maximum(1.0, rhs)
            rep.absorb(rhs - lhs, tol, lambda j, S=S, R=R: {
                "measure": measure.tag, "s": S[j].tolist(), "R": R[j].tolist()})
        reps.append(rep)
    return reps


# ------------------------------------------------------------------ suites

SUITES = ("bounds", "subgradients", "dominance", "norms", "all")


def run_suite(name, trials=10_000, seed=0, weight_scale=1.0):
    """Run one named suite and return its reports in a fixed order."""
    if name not in SUITES:
        raise ParameterError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    names = SUITES[:-1] if name == "all" else (name,)
    reports = []
    for suite in names:
        if suite == "bounds":
            for measure in SLAM_MEASURES:
                reports.append(verify_upper_bound(measure, trials, 8, seed, weight_scale=weight_scale))
            reports += verify_weight_sums()
            reports.append(verify_ideal_dcg())
        elif suite == "subgradients":
            reports += verify_convexity(trials, seed)
            reports += verify_subgradient(trials, seed)
        elif suite == "dominance":
            reports.append(verify_map_tightness())
            reports.append(verify_dominance_map(8, 1e-3))
        elif suite == "norms":
            reports += verify_norms(trials, seed, weight_scale=weight_scale)
    return reports
