"""Loop kernels compiled with numba.

Every function mirrors one in ``_kernels_np`` and must agree with it to
floating-point rounding. Row kernels take ``S`` (float64, n x m) and ``R``
(int64, n x m); ragged kernels take concatenated rows plus ``offsets``.
"""

import numpy as np
from numba import njit

NDCG, MAP, NDCG_K = 0, 1, 2


@njit(cache=True)
def _gain(r):
    return 2.0 ** r - 1.0


@njit(cache=True)
def _disc(position):
    return 1.0 / np.log2(position + 1.0)


@njit(cache=True)
def _desc_order(x):
    # mergesort is stable, so equal values keep ascending index order
    return np.argsort(-x, kind="mergesort")


@njit(cache=True)
def order_rows(S):
    n, m = S.shape
    out = np.empty((n, m), dtype=np.int64)
    for a in range(n):
        out[a] = _desc_order(S[a])
    return out


@njit(cache=True)
def ndcg_rows(S, R):
    n, m = S.shape
    out = np.empty(n)
    for a in range(n):
        order = _desc_order(S[a])
        ideal = R[a][_desc_order(R[a].astype(np.float64))]
        num = 0.0
        z = 0.0
        for p in range(m):
            dp = _disc(p + 1.0)
            num += _gain(R[a, order[p]]) * dp
            z += _gain(ideal[p]) * dp
        out[a] = 1.0 if z == 0.0 else num / z
    return out


@njit(cache=True)
def ndcg_at_k_rows(S, R, K):
    n, m = S.shape
    out = np.empty(n)
    for a in range(n):
        order = _desc_order(S[a])
        r_by_pos = np.empty(m, dtype=np.int64)
        for p in range(m):
            r_by_pos[p] = R[a, order[p]]
        # equal grades take canonical indices in order of placement
        q = _desc_order(r_by_pos.astype(np.float64))
        k = K[a]
        num = 0.0
        z = 0.0
        for i in range(k):
            g = _gain(r_by_pos[q[i]])
            num += g * _disc(q[i] + 1.0)
            z += g * _disc(i + 1.0)
        out[a] = 1.0 if z == 0.0 else num / z
    return out


@njit(cache=True)
def map_rows(S, R):
    n, m = S.shape
    out = np.empty(n)
    for a in range(n):
        order = _desc_order(S[a])
        hits = 0
        acc = 0.0
        for p in range(m):
            if R[a, order[p]] == 1:
                hits += 1
                acc += hits / (p + 1.0)
        out[a] = 1.0 if hits == 0 else acc / hits
    return out


@njit(cache=True)
def weights_rows(R, code, K):
    n, m = R.shape
    V = np.zeros((n, m))
    vc = np.empty(m)
    for a in range(n):
        c = _desc_order(R[a].astype(np.float64))
        vc[:] = 0.0
        if code == NDCG:
            z = 0.0
            for i in range(m):
                z += _gain(R[a, c[i]]) * _disc(i + 1.0)
            if z > 0.0:
                g_last = _gain(R[a, c[m - 1]])
                d_last = _disc(float(m))
                for i in range(m):
                    vc[i] = (_gain(R[a, c[i]]) - g_last) * (_disc(i + 1.0) - d_last) / z
        elif code == MAP:
            r = 0
            for i in range(m):
                r += R[a, i]
            if 0 < r < m:
                for i in range(r):
                    ii = i + 1.0
                    vc[i] = 1.0 / r - ii / (r * (m - r + ii))
        else:
            k = K[a]
            z = 0.0
            for i in range(k):
                z += _gain(R[a, c[i]]) * _disc(i + 1.0)
            if z > 0.0:
                for i in range(k):
                    vc[i] = _gain(R[a, c[i]]) * _disc(i + 1.0) / z
        for i in range(m):
            V[a, c[i]] = vc[i]
    return V


@njit(cache=True)
def _slam_row(s, r, v, delta, grad):
    m = s.shape[0]
    loss = 0.0
    for i in range(m):
        best = 0.0
        arg = -1
        for j in range(m):
            if r[i] > r[j]:
                b = (delta + s[j]) - s[i]
                if b > best:
                    best = b
                    arg = j
        if arg >= 0:
            loss += v[i] * best
            grad[arg] += v[i]
            grad[i] -= v[i]
    return loss


@njit(cache=True)
def slam_rows(S, R, V, delta):
    n, m = S.shape
    loss = np.empty(n)
    grad = np.zeros((n, m))
    for a in range(n):
        loss[a] = _slam_row(S[a], R[a], V[a], delta, grad[a])
    return loss, grad


@njit(cache=True)
def ranksvm_rows(S, R):
    n, m = S.shape
    loss = np.zeros(n)
    grad = np.zeros((n, m))
    for a in range(n):
        for i in range(m):
            for j in range(m):
                if R[a, i] > R[a, j]:
                    b = (1.0 + S[a, j]) - S[a, i]
                    if b > 0.0:
                        loss[a] += b
                        grad[a, j] += 1.0
                        grad[a, i] -= 1.0
    return loss, grad


@njit(cache=True)
def _scores(X, lo, hi, w):
    d = w.shape[0]
    s = np.zeros(hi - lo)
    for i in range(lo, hi):
        acc = 0.0
        for f in range(d):
            acc += X[i, f] * w[f]
        s[i - lo] = acc
    return s


@njit(cache=True)
def slam_ragged(X, R, V, offsets, w, delta):
    """Summed SLAM loss over queries and its summed parameter subgradient."""
    nq = offsets.shape[0] - 1
    d = w.shape[0]
    total = 0.0
    gw = np.zeros(d)
    losses = np.empty(nq)
    for q in range(nq):
        lo = offsets[q]
        hi = offsets[q + 1]
        s = _scores(X, lo, hi, w)
        gs = np.zeros(hi - lo)
        lq = _slam_row(s, R[lo:hi], V[lo:hi], delta, gs)
        losses[q] = lq
        total += lq
        for i in range(hi - lo):
            if gs[i] != 0.0:
                for f in range(d):
                    gw[f] += gs[i] * X[lo + i, f]
    return total, gw, losses


@njit(cache=True)
def sgd_epoch(X, R, V, offsets, visit, w, lam, radius, lip, t0, delta, csum, snap_steps):
    """One pass of projected stochastic subgradient steps.

    Step size at global step t is radius / (lip * sqrt(t)). ``csum`` holds the
    running sum of iterates; its value after each global step listed in
    ``snap_steps`` is copied into the returned snapshot array.
    """
    d = w.shape[0]
    snaps = np.zeros((snap_steps.shape[0], d))
    ptr = 0
    gw = np.empty(d)
    for idx in range(visit.shape[0]):
        t = t0 + idx + 1
        q = visit[idx]
        lo = offsets[q]
        hi = offsets[q + 1]
        s = _scores(X, lo, hi, w)
        gs = np.zeros(hi - lo)
        _slam_row(s, R[lo:hi], V[lo:hi], delta, gs)
        for f in range(d):
            gw[f] = lam * w[f]
        for i in range(hi - lo):
            if gs[i] != 0.0:
                for f in range(d):
                    gw[f] += gs[i] * X[lo + i, f]
        eta = radius / (lip * np.sqrt(t))
        nrm = 0.0
        for f in range(d):
            w[f] -= eta * gw[f]
            nrm += w[f] * w[f]
        nrm = np.sqrt(nrm)
        if nrm > radius:
            scale = radius / nrm
            for f in range(d):
                w[f] *= scale
        for f in range(d):
            csum[f] += w[f]
        while ptr < snap_steps.shape[0] and snap_steps[ptr] == t:
            snaps[ptr] = csum
            ptr += 1
    return snaps
