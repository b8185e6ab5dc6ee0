# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: pairwise light-corrected distances and absorbing walks.

Signature-compatible with ohfs._kernels_py; ohfs.backend picks whichever is
importable.  Distances are accumulated pair-by-pair in one pass over the
feature axis, so no transformed copies of the inputs are materialized.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline double _rng_next(unsigned long long *state) noexcept nogil:
    # splitmix64, mapped to a double in [0, 1)
    cdef unsigned long long z
    state[0] += <unsigned long long>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <unsigned long long>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <unsigned long long>0x94D049BB133111EB
    z = z ^ (z >> 31)
    return <double>(z >> 11) * (1.0 / 9007199254740992.0)


cdef inline double _pair_sq(const double* x, const double* y,
                            const double* psi, Py_ssize_t d,
                            double mx, double my, bint correct_light) noexcept nogil:
    cdef double raw = 0.0, cen = 0.0, rat = 0.0
    cdef double dr, dc, dt, best
    cdef double shift = mx - my
    cdef bint ratio_ok = correct_light and mx != 0.0 and my != 0.0
    cdef Py_ssize_t k
    if not correct_light:
        for k in range(d):
            dr = x[k] - y[k]
            raw += psi[k] * dr * dr
        return raw if raw > 0.0 else 0.0
    for k in range(d):
        dr = x[k] - y[k]
        raw += psi[k] * dr * dr
        dc = dr - shift
        cen += psi[k] * dc * dc
        if ratio_ok:
            dt = x[k] / mx - y[k] / my
            rat += psi[k] * dt * dt
    best = raw if raw < cen else cen
    if ratio_ok and rat < best:
        best = rat
    return best if best > 0.0 else 0.0


def pairwise_sq_weighted(double[:, ::1] X, double[:, ::1] Y,
                         double[::1] psi, bint correct_light):
    """Squared weighted-L2 distances between rows of X and rows of Y."""
    cdef Py_ssize_t m = X.shape[0], n = Y.shape[0], d = X.shape[1]
    out = np.empty((m, n))
    mean_x = np.asarray(X).mean(axis=1) if d else np.zeros(m)
    mean_y = np.asarray(Y).mean(axis=1) if d else np.zeros(n)
    cdef double[:, ::1] res = out
    cdef double[::1] mx = mean_x
    cdef double[::1] my = mean_y
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(m):
            for j in range(n):
                res[i, j] = _pair_sq(&X[i, 0], &Y[j, 0], &psi[0], d,
                                     mx[i], my[j], correct_light)
    return out


def rowwise_sq_weighted(double[::1] x, double[:, ::1] Y,
                        double[::1] psi, bint correct_light):
    """Squared weighted-L2 distances from one vector to each row of Y."""
    cdef Py_ssize_t n = Y.shape[0], d = Y.shape[1]
    out = np.empty(n)
    cdef double mx = np.asarray(x).mean() if d else 0.0
    mean_y = np.asarray(Y).mean(axis=1) if d else np.zeros(n)
    cdef double[::1] res = out
    cdef double[::1] my = mean_y
    cdef Py_ssize_t j
    with nogil:
        for j in range(n):
            res[j] = _pair_sq(&x[0], &Y[j, 0], &psi[0], d, mx, my[j], correct_light)
    return out


def absorbing_walks(double[:, ::1] cdf, unsigned char[::1] absorbing,
                    double[::1] values, Py_ssize_t start, Py_ssize_t n_walks,
                    unsigned long long seed, Py_ssize_t max_steps):
    """Simulate absorbing random walks; see ohfs._kernels_py for the contract."""
    cdef Py_ssize_t n = cdf.shape[0]
    cdef double total = 0.0, total_sq = 0.0
    cdef double r, v
    cdef Py_ssize_t w, cur, steps, lo, hi, mid
    cdef unsigned long long state = seed
    cdef bint truncated = 0
    with nogil:
        for w in range(n_walks):
            cur = start
            steps = 0
            v = 0.0
            while True:
                if absorbing[cur]:
                    v = values[cur]
                    break
                if steps >= max_steps:
                    truncated = 1
                    break
                r = _rng_next(&state)
                # first index in cdf[cur] with value > r; index n = sink
                lo = 0
                hi = n
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if cdf[cur, mid] > r:
                        hi = mid
                    else:
                        lo = mid + 1
                if lo >= n:
                    v = 0.0
                    break
                cur = lo
                steps += 1
            if truncated:
                break
            total += v
            total_sq += v * v
    if truncated:
        return total, total_sq, False
    return total, total_sq, True
