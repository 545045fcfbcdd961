# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled grid kernels for the corpus fields.

Same contract as the NumPy fallback ``_kernels_py.band_sums``, restricted to
the tagged corpus field kinds and weight ids, n <= 3.  Per-axis factor tables
are precomputed so the inner loops run on lookups and a handful of flops; the
only transcendentals per point are the log/cbrt of the weight evaluations.
"""

import numpy as np

from libc.math cimport fabs, sqrt, log, cbrt

BACKEND = "cython"

# field kind tags (must match varbound.domain)
DEF KIND_CONST = 0
DEF KIND_LINEAR = 1
DEF KIND_BOWL = 2
DEF KIND_TRIG = 3
DEF KIND_SADDLE = 4


cdef inline int _bucket(double s, double[::1] a, int m) noexcept:
    # number of grid thresholds <= s  (searchsorted side="right")
    cdef int lo = 0, hi = m, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= s:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _weight_eval(long wid, double s, double logs) noexcept:
    if wid == 1:       # 1 - ln(s)
        return 1.0 - logs
    elif wid == 2:     # s^(-1/3)
        return 1.0 / cbrt(s)
    return -logs       # wid == 3: -ln(s)


cdef inline void _deposit(double s, double g, double ax, double count,
                          double[::1] a, int m, long[::1] wids, int nw,
                          double[::1] G1, double[:, ::1] W2, double[::1] AX) noexcept:
    cdef int b = _bucket(s, a, m)
    cdef int iw
    cdef double logs
    G1[b] += count * g
    AX[b] += count * ax
    if b >= 1:
        logs = log(s)
        for iw in range(nw):
            W2[iw, b] += count * g * _weight_eval(wids[iw], s, logs)


def band_sums(int kind, tuple params, center, double half_side, int cells,
              a_grid, weight_ids):
    """Bucketed midpoint sums (G1, W2, AX) over the cells^n grid; see fallback."""
    center_arr = np.asarray(center, dtype=np.float64)
    cdef int n = center_arr.shape[0]
    if n > 3:
        raise ValueError("compiled kernel supports n <= 3")
    a = np.ascontiguousarray(a_grid, dtype=np.float64)
    if a.ndim != 1 or a.size == 0 or np.any(np.diff(a) <= 0):
        raise ValueError("a_grid must be a nonempty strictly increasing 1-D array")
    if a[0] <= 0.0:
        raise ValueError("thresholds must be positive")
    wids_arr = np.ascontiguousarray(weight_ids, dtype=np.int64)
    if not np.all((wids_arr >= 1) & (wids_arr <= 3)):
        raise ValueError("unknown weight id")
    cdef int m = a.shape[0]
    cdef int nw = wids_arr.shape[0]

    G1_arr = np.zeros(m + 1)
    W2_arr = np.zeros((nw, m + 1))
    AX_arr = np.zeros(m + 1)
    cdef double cell_vol = (2.0 * half_side / cells) ** n

    if kind == KIND_CONST:
        return G1_arr, W2_arr, AX_arr   # zero gradient: nothing to deposit

    step = 2.0 * half_side / cells
    axes = np.stack([center_arr[j] - half_side + (np.arange(cells) + 0.5) * step
                     for j in range(n)])

    cdef double amp = 0.0, kf = 0.0, scale = 0.0
    F_arr = D_arr = None
    if kind == KIND_TRIG:
        amp, kf = params
        F_arr = np.empty((n, cells))
        D_arr = np.empty((n, cells))
        for t in range(n):
            arg = kf * axes[t]
            if t % 2 == 0:
                F_arr[t] = np.sin(arg)
                D_arr[t] = kf * np.cos(arg)
            else:
                F_arr[t] = np.cos(arg)
                D_arr[t] = -kf * np.sin(arg)
        F_arr[0] *= amp   # fold the amplitude into the first axis so every
        D_arr[0] *= amp   # one-derivative product picks it up exactly once
    elif kind == KIND_SADDLE:
        scale = params[0]
    elif kind == KIND_LINEAR:
        pass
    elif kind == KIND_BOWL:
        pass
    else:
        raise ValueError(f"unknown field kind {kind}")

    cdef double[:, ::1] xt = np.ascontiguousarray(axes)
    cdef double[::1] av = a
    cdef long[::1] wv = wids_arr
    cdef double[::1] G1 = G1_arr
    cdef double[:, ::1] W2 = W2_arr
    cdef double[::1] AX = AX_arr
    cdef double[:, ::1] F
    cdef double[:, ::1] D

    if kind == KIND_TRIG:
        F = np.ascontiguousarray(F_arr)
        D = np.ascontiguousarray(D_arr)
        _trig(n, cells, xt, F, D, av, m, wv, nw, G1, W2, AX)
    elif kind == KIND_LINEAR:
        _linear(n, cells, xt, av, m, wv, nw, G1, W2, AX)
    elif kind == KIND_BOWL:
        _bowl(n, cells, xt, av, m, wv, nw, G1, W2, AX)
    elif kind == KIND_SADDLE:
        _saddle(n, cells, scale, xt, av, m, wv, nw, G1, W2, AX)

    G1_arr *= cell_vol
    W2_arr *= cell_vol
    AX_arr *= cell_vol
    return G1_arr, W2_arr, AX_arr


cdef void _linear(int n, int N, double[:, ::1] xt,
                  double[::1] a, int m, long[::1] wids, int nw,
                  double[::1] G1, double[:, ::1] W2, double[::1] AX) noexcept:
    # sigma = x1, gradient = e1: everything depends on the first axis only
    cdef Py_ssize_t i
    cdef double count = 1.0
    if n == 2:
        count = N
    elif n == 3:
        count = <double> N * N
    for i in range(N):
        _deposit(fabs(xt[0, i]), 1.0, 1.0, count, a, m, wids, nw, G1, W2, AX)


cdef void _bowl(int n, int N, double[:, ::1] xt,
                double[::1] a, int m, long[::1] wids, int nw,
                double[::1] G1, double[:, ::1] W2, double[::1] AX) noexcept:
    # sigma = |x|^2/2 >= 0, gradient = x
    cdef Py_ssize_t i, j, k
    cdef double qi, qij, two_s, ai, aij, s
    for i in range(N):
        qi = xt[0, i] * xt[0, i]
        ai = fabs(xt[0, i])
        if n == 1:
            _deposit(0.5 * qi, ai, ai, 1.0, a, m, wids, nw, G1, W2, AX)
            continue
        for j in range(N):
            qij = qi + xt[1, j] * xt[1, j]
            aij = ai + fabs(xt[1, j])
            if n == 2:
                _deposit(0.5 * qij, sqrt(qij), aij, 1.0, a, m, wids, nw, G1, W2, AX)
                continue
            for k in range(N):
                two_s = qij + xt[2, k] * xt[2, k]
                s = 0.5 * two_s
                _deposit(s, sqrt(two_s), aij + fabs(xt[2, k]), 1.0,
                         a, m, wids, nw, G1, W2, AX)


cdef void _trig(int n, int N, double[:, ::1] xt, double[:, ::1] F, double[:, ::1] D,
                double[::1] a, int m, long[::1] wids, int nw,
                double[::1] G1, double[:, ::1] W2, double[::1] AX) noexcept:
    # sigma = F1*F2*F3 with the amplitude folded into axis 0; the t-th partial
    # replaces factor t by its derivative table
    cdef Py_ssize_t i, j, k
    cdef double f1, d1, f12, d1f2, f1d2, g1, g2, g3, sig
    for i in range(N):
        f1 = F[0, i]
        d1 = D[0, i]
        if n == 1:
            _deposit(fabs(f1), fabs(d1), fabs(d1), 1.0, a, m, wids, nw, G1, W2, AX)
            continue
        for j in range(N):
            f12 = f1 * F[1, j]
            d1f2 = d1 * F[1, j]
            f1d2 = f1 * D[1, j]
            if n == 2:
                _deposit(fabs(f12), sqrt(d1f2 * d1f2 + f1d2 * f1d2),
                         fabs(d1f2) + fabs(f1d2), 1.0, a, m, wids, nw, G1, W2, AX)
                continue
            for k in range(N):
                sig = f12 * F[2, k]
                g1 = d1f2 * F[2, k]
                g2 = f1d2 * F[2, k]
                g3 = f12 * D[2, k]
                _deposit(fabs(sig), sqrt(g1 * g1 + g2 * g2 + g3 * g3),
                         fabs(g1) + fabs(g2) + fabs(g3), 1.0,
                         a, m, wids, nw, G1, W2, AX)


cdef void _saddle(int n, int N, double scale, double[:, ::1] xt,
                  double[::1] a, int m, long[::1] wids, int nw,
                  double[::1] G1, double[:, ::1] W2, double[::1] AX) noexcept:
    # n >= 2: sigma = scale*(x^3 - 3*x*y^2); n == 1: sigma = scale*x^3.
    # Nothing depends on the third axis, so its cells collapse into a count.
    cdef Py_ssize_t i, j
    cdef double x, y, sig, g1, g2
    cdef double count = N if n == 3 else 1.0
    for i in range(N):
        x = xt[0, i]
        if n == 1:
            g1 = 3.0 * scale * x * x
            _deposit(fabs(scale * x * x * x), g1, g1, 1.0, a, m, wids, nw, G1, W2, AX)
            continue
        for j in range(N):
            y = xt[1, j]
            sig = scale * (x * x * x - 3.0 * x * y * y)
            g1 = 3.0 * scale * (x * x - y * y)
            g2 = -6.0 * scale * x * y
            _deposit(fabs(sig), sqrt(g1 * g1 + g2 * g2), fabs(g1) + fabs(g2),
                     count, a, m, wids, nw, G1, W2, AX)
