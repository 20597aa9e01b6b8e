# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Hough vote-accumulation kernels.

Must stay vote-for-vote identical to the NumPy fallback in _voting_np.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, cos, fabs, sqrt

cnp.import_array()

COMPILED = True


def ellipse_votes(cnp.float64_t[::1] dx, cnp.float64_t[::1] dy,
                  double lo, double hi, double bin_w):
    cdef Py_ssize_t n_bins = <Py_ssize_t>ceil((hi - lo) / bin_w)
    acc_arr = np.zeros((n_bins, n_bins), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] acc = acc_arr
    cdef Py_ssize_t n = dx.shape[0]
    cdef Py_ssize_t i, ia, ib
    cdef double px, py, a, b, under
    for i in range(n):
        px = fabs(dx[i])
        py = fabs(dy[i])
        for ia in range(n_bins):
            a = lo + (ia + 0.5) * bin_w
            under = a * a - px * px
            if under <= 1e-12:
                continue
            b = py * a / sqrt(under)
            if lo <= b <= hi:
                ib = <Py_ssize_t>((b - lo) / bin_w)
                if ib >= n_bins:
                    ib = n_bins - 1
                acc[ia, ib] += 1
    return acc_arr


def parabola_votes(cnp.float64_t[::1] rdist, cnp.float64_t[::1] phi,
                   cnp.float64_t[::1] theta_v,
                   double d_lo, double d_hi, double bin_w):
    cdef Py_ssize_t n_d = <Py_ssize_t>ceil((d_hi - d_lo) / bin_w)
    cdef Py_ssize_t m = theta_v.shape[0], n = rdist.shape[0]
    acc_arr = np.zeros((m, n_d), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] acc = acc_arr
    cdef Py_ssize_t i, k, idx
    cdef double d, tv
    for k in range(m):
        tv = theta_v[k]
        for i in range(n):
            d = rdist[i] * (1.0 + cos(phi[i] - tv))
            if d_lo <= d <= d_hi:
                idx = <Py_ssize_t>((d - d_lo) / bin_w)
                if idx >= n_d:
                    idx = n_d - 1
                acc[k, idx] += 1
    return acc_arr
