# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernels.

Each function must remain arithmetically identical to its counterpart in
``_pykernels``: same floating-point operations in the same order, and the
same comparison semantics (including NaN handling via negated comparisons).
Random numbers are always drawn by the caller, never here, so backend choice
can never change a result.
"""

from libc.string cimport memset

import numpy as np

cimport numpy as cnp

cnp.import_array()


def ku_scan(const double[:, ::1] exps, double eps1, double eps2, bint has_eps2, cnp.int64_t[::1] out):
    """Per-path stable-prefix length from exponential spacings.

    ``exps`` holds n+1 exponential variates per row; the implied order
    statistics are U_(i) = S_i * (1/S_{n+1}).  ``out[p]`` is the largest k
    such that the first k order statistics satisfy the band, n if all do,
    or -1 when the row is degenerate (ties or endpoint collisions) and must
    be redrawn by the caller.
    """
    cdef Py_ssize_t b = exps.shape[0]
    cdef Py_ssize_t n = exps.shape[1] - 1
    cdef double dn = <double> n
    cdef Py_ssize_t p, j, mi
    cdef double total, inv, s, u, prev, up, lo
    cdef cnp.int64_t k
    cdef bint bad, fail
    with nogil:
        for p in range(b):
            total = 0.0
            for j in range(n + 1):
                total += exps[p, j]
            inv = 1.0 / total
            s = 0.0
            prev = 0.0
            k = n
            bad = 0
            for j in range(n):
                s += exps[p, j]
                u = s * inv
                if not (u > prev and u < 1.0):
                    bad = 1
                    break
                prev = u
                if k == n:
                    up = eps1 + ((1.0 - eps1) * (<double> j)) / dn
                    fail = u > up
                    if (not fail) and has_eps2:
                        mi = j + 1 if j + 1 < n else n - 1
                        lo = ((1.0 + eps2) * (<double> mi)) / dn - eps2
                        fail = u < lo
                    if fail:
                        k = j
            out[p] = -1 if bad else k


def kc_scan(const double[:, ::1] u, const double[::1] f_grid, const double[::1] p_grid,
            double c0, double lo, double hi, cnp.int64_t[:, ::1] scratch,
            cnp.int64_t[::1] out):
    """Per-path count of deaths before the income first leaves the band.

    ``u`` holds one uniform per member; death periods follow from the
    right-sided search of ``f_grid`` (死 period t means death in (t, t+1]).
    ``p_grid[t]`` is the true one-period survival over that period.  Income
    starts at ``c0`` and evolves by c *= p/phat with phat the realized
    survivor ratio; the first period with income outside [lo, hi] fixes the
    result, otherwise it is n.  ``scratch`` must be (rows>=1, len(p_grid))
    int64, one row per concurrent call.
    """
    cdef Py_ssize_t b = u.shape[0]
    cdef Py_ssize_t n = u.shape[1]
    cdef Py_ssize_t nper = p_grid.shape[0]
    cdef Py_ssize_t gl = f_grid.shape[0]
    cdef cnp.int64_t* counts = &scratch[0, 0]
    cdef Py_ssize_t p, j, s, ilo, ihi, mid
    cdef cnp.int64_t cum, ls, lprev, k
    cdef double v, c, phat
    with nogil:
        for p in range(b):
            memset(counts, 0, nper * sizeof(cnp.int64_t))
            for j in range(n):
                v = u[p, j]
                # upper-bound binary search, identical to
                # np.searchsorted(f_grid, v, side='right')
                ilo = 0
                ihi = gl
                while ilo < ihi:
                    mid = (ilo + ihi) >> 1
                    if v < f_grid[mid]:
                        ihi = mid
                    else:
                        ilo = mid + 1
                counts[ilo - 1] += 1
            cum = 0
            lprev = n
            c = c0
            k = n
            for s in range(1, nper + 1):
                cum += counts[s - 1]
                ls = n - cum
                if ls == 0:
                    break
                phat = (<double> ls) / (<double> lprev)
                c = c * (p_grid[s - 1] / phat)
                if c < lo or c > hi:
                    k = cum
                    break
                lprev = ls
            out[p] = k


def psi_scan(const double[:, ::1] z, double sqrt_dt, Py_ssize_t j2, double b1,
             double b2, bint has_lower, cnp.uint8_t[::1] out):
    """Per-path indicator that the scaled random walk stays inside the barriers.

    The walk w_j = sum z * sqrt_dt must stay <= b1 at every step and >= -b2
    over the first ``j2`` steps (when ``has_lower``).
    """
    cdef Py_ssize_t b = z.shape[0]
    cdef Py_ssize_t steps = z.shape[1]
    cdef Py_ssize_t p, j
    cdef double w
    cdef cnp.uint8_t ok
    with nogil:
        for p in range(b):
            w = 0.0
            ok = 1
            for j in range(steps):
                w += z[p, j] * sqrt_dt
                if w > b1:
                    ok = 0
                    break
                if has_lower and j < j2 and w < -b2:
                    ok = 0
                    break
            out[p] = ok
