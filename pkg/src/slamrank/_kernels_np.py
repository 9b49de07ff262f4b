"""Vectorized numpy versions of the kernels in ``_kernels_jit``."""

import numpy as np

NDCG, MAP, NDCG_K = 0, 1, 2


def _gain(r):
    return np.power(2.0, r) - 1.0


def _disc_table(m):
    return 1.0 / np.log2(np.arange(2.0, m + 2.0))


def _desc_order(x):
    return np.argsort(-x, axis=-1, kind="stable")


def order_rows(S):
    return _desc_order(S)


def ndcg_rows(S, R):
    m = S.shape[1]
    D = _disc_table(m)
    placed = np.take_along_axis(R, _desc_order(S), axis=1)
    ideal = -np.sort(-R, axis=1)
    num = (_gain(placed) * D).sum(axis=1)
    z = (_gain(ideal) * D).sum(axis=1)
    out = np.ones(S.shape[0])
    ok = z > 0.0
    out[ok] = num[ok] / z[ok]
    return out


def ndcg_at_k_rows(S, R, K):
    n, m = S.shape
    D = _disc_table(m)
    r_by_pos = np.take_along_axis(R, _desc_order(S), axis=1)
    q = _desc_order(r_by_pos)
    ideal = np.take_along_axis(r_by_pos, q, axis=1)
    g = _gain(ideal)
    keep = np.arange(m)[None, :] < np.asarray(K)[:, None]
    num = np.where(keep, g * D[q], 0.0).sum(axis=1)
    z = np.where(keep, g * D[None, :], 0.0).sum(axis=1)
    out = np.ones(n)
    ok = z > 0.0
    out[ok] = num[ok] / z[ok]
    return out


def map_rows(S, R):
    m = S.shape[1]
    rel = np.take_along_axis(R, _desc_order(S), axis=1) == 1
    hits = np.cumsum(rel, axis=1)
    prec = np.where(rel, hits / np.arange(1.0, m + 1.0), 0.0)
    r = rel.sum(axis=1)
    out = np.ones(S.shape[0])
    ok = r > 0
    out[ok] = prec[ok].sum(axis=1) / r[ok]
    return out


def weights_rows(R, code, K):
    n, m = R.shape
    c = _desc_order(R)
    Rs = np.take_along_axis(R, c, axis=1)
    D = _disc_table(m)
    idx = np.arange(1.0, m + 1.0)
    if code == NDCG:
        G = _gain(Rs)
        z = (G * D).sum(axis=1, keepdims=True)
        safe = np.where(z > 0.0, z, 1.0)
        vc = np.where(z > 0.0, (G - G[:, -1:]) * (D - D[-1]) / safe, 0.0)
    elif code == MAP:
        r = R.sum(axis=1, keepdims=True).astype(np.float64)
        ok = (r > 0) & (r < m)
        rs = np.where(ok, r, 1.0)
        vals = 1.0 / rs - idx / (rs * (m - rs + idx))
        vc = np.where(ok & (idx <= r), vals, 0.0)
    else:
        keep = idx[None, :] <= np.asarray(K)[:, None]
        t = np.where(keep, _gain(Rs) * D, 0.0)
        z = t.sum(axis=1, keepdims=True)
        vc = np.where(z > 0.0, t / np.where(z > 0.0, z, 1.0), 0.0)
    V = np.empty((n, m))
    np.put_along_axis(V, c, vc, axis=1)
    return V


def _slam_parts(S, R, delta):
    diff = (delta + S[:, None, :]) - S[:, :, None]
    B = np.where(R[:, :, None] > R[:, None, :], diff, 0.0)
    inner = B.max(axis=2)
    arg = B.argmax(axis=2)
    return inner, arg


def slam_rows(S, R, V, delta):
    n, m = S.shape
    inner, arg = _slam_parts(S, R, delta)
    active = inner > 0.0
    wv = np.where(active, V, 0.0)
    loss = (wv * np.where(active, inner, 0.0)).sum(axis=1)
    grad = -wv
    rows = np.repeat(np.arange(n), m)
    np.add.at(grad, (rows, arg.ravel()), wv.ravel())
    return loss, grad


def ranksvm_rows(S, R):
    diff = (1.0 + S[:, None, :]) - S[:, :, None]
    B = np.where(R[:, :, None] > R[:, None, :], diff, 0.0)
    act = B > 0.0
    loss = np.where(act, B, 0.0).sum(axis=(1, 2))
    grad = act.sum(axis=1).astype(np.float64) - act.sum(axis=2)
    return loss, grad


def _query_slices(offsets):
    return [slice(offsets[q], offsets[q + 1]) for q in range(len(offsets) - 1)]


def slam_ragged(X, R, V, offsets, w, delta):
    gw = np.zeros(w.shape[0])
    losses = np.empty(len(offsets) - 1)
    for q, sl in enumerate(_query_slices(offsets)):
        s = X[sl] @ w
        lq, gs = slam_rows(s[None, :], R[sl][None, :], V[sl][None, :], delta)
        losses[q] = lq[0]
        gw += X[sl].T @ gs[0]
    return losses.sum(), gw, losses


def sgd_epoch(X, R, V, offsets, visit, w, lam, radius, lip, t0, delta, csum, snap_steps):
    snaps = np.zeros((len(snap_steps), w.shape[0]))
    ptr = 0
    for idx, q in enumerate(visit):
        t = t0 + idx + 1
        sl = slice(offsets[q], offsets[q + 1])
        s = X[sl] @ w
        _, gs = slam_rows(s[None, :], R[sl][None, :], V[sl][None, :], delta)
        gw = lam * w + X[sl].T @ gs[0]
        w -= radius / (lip * np.sqrt(t)) * gw
        nrm = np.sqrt(w @ w)
        if nrm > radius:
            w *= radius / nrm
        csum += w
        while ptr < len(snap_steps) and snap_steps[ptr] == t:
            snaps[ptr] = csum
            ptr += 1
    return snaps
