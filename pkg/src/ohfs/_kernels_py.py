"""Numpy implementations of the hot kernels.

Mirrors the signatures of the compiled module ``ohfs._core``; one of the two
is selected at import time by :mod:`ohfs.backend`.  Pairwise distances use the
BLAS expansion ``|a-b|^2 = |a|^2 + |b|^2 - 2 a.b``; the walk simulator steps
all pending walks in lockstep, in chunks, to bound memory.
"""

import numpy as np

BACKEND_NAME = "python"

_WALK_CHUNK = 1 << 16


def _sq_cross(A, B):
    # |a_i - b_j|^2 via the gram expansion; clamped, fp can dip below zero
    d2 = (
        np.einsum("ij,ij->i", A, A)[:, None]
        + np.einsum("ij,ij->i", B, B)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def pairwise_sq_weighted(X, Y, psi, correct_light):
    """Squared weighted-L2 distances between rows of X and rows of Y.

    With ``correct_light`` the result is the minimum over the raw,
    mean-subtracted and mean-ratio variants of each pair; the ratio variant
    is dropped for pairs where either row mean is exactly zero.
    """
    s = np.sqrt(psi)
    Xs = X * s
    Ys = Y * s
    d2 = _sq_cross(Xs, Ys)
    if not correct_light:
        return d2

    mx = X.mean(axis=1)
    my = Y.mean(axis=1)

    Xc = (X - mx[:, None]) * s
    Yc = (Y - my[:, None]) * s
    np.minimum(d2, _sq_cross(Xc, Yc), out=d2)

    vx = np.flatnonzero(mx != 0.0)
    vy = np.flatnonzero(my != 0.0)
    if vx.size and vy.size:
        Xr = (X[vx] / mx[vx, None]) * s
        Yr = (Y[vy] / my[vy, None]) * s
        sub = d2[np.ix_(vx, vy)]
        np.minimum(sub, _sq_cross(Xr, Yr), out=sub)
        d2[np.ix_(vx, vy)] = sub
    return d2


def rowwise_sq_weighted(x, Y, psi, correct_light):
    """Squared weighted-L2 distances from one vector to each row of Y.

    Computed from explicit differences, so identical vectors give exactly 0
    (the quantizer's duplicate-merge rule depends on that).
    """
    diff = Y - x[None, :]
    d2 = (diff * diff) @ psi
    if not correct_light:
        np.maximum(d2, 0.0, out=d2)
        return d2

    mx = x.mean()
    my = Y.mean(axis=1)

    diff_c = diff - (my - mx)[:, None]
    np.minimum(d2, (diff_c * diff_c) @ psi, out=d2)

    if mx != 0.0:
        vy = np.flatnonzero(my != 0.0)
        if vy.size:
            diff_r = x[None, :] / mx - Y[vy] / my[vy, None]
            d2[vy] = np.minimum(d2[vy], (diff_r * diff_r) @ psi)
    np.maximum(d2, 0.0, out=d2)
    return d2


def absorbing_walks(cdf, absorbing, values, start, n_walks, seed, max_steps):
    """Simulate absorbing random walks from ``start``.

    cdf[v] holds the cumulative outcome probabilities at vertex v: outcomes
    0..n-1 move to that vertex, outcome n terminates at the sink (value 0).
    Walks stop immediately at absorbing vertices, collecting ``values[v]``.

    Returns (sum, sum_of_squares, completed) where ``completed`` is False if
    any walk exceeded ``max_steps``.
    """
    n = cdf.shape[0]
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = int(n_walks)
    while remaining > 0:
        b = min(_WALK_CHUNK, remaining)
        remaining -= b
        pos = np.full(b, start, dtype=np.intp)
        val = np.zeros(b)
        live = np.arange(b)
        steps = 0
        while live.size:
            at = pos[live]
            stop = absorbing[at].astype(bool)
            if stop.any():
                hit = live[stop]
                val[hit] = values[pos[hit]]
                live = live[~stop]
                if not live.size:
                    break
                at = pos[live]
            if steps >= max_steps:
                return total, total_sq, False
            r = rng.random(live.size)
            nxt = (cdf[at] < r[:, None]).sum(axis=1)
            gone = nxt >= n
            live_next = live[~gone]
            pos[live_next] = nxt[~gone]
            live = live_next
            steps += 1
        total += val.sum()
        total_sq += val @ val
    return total, total_sq, True
