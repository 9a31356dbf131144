"""Pure-numpy scan kernels, the fallback when the compiled extension is absent.

Arithmetic here mirrors ``_ckernels`` operation for operation (same order of
multiplies/divides, negated comparisons for degenerate-row detection) so the
two backends produce bit-identical outputs from identical inputs.
"""

import numpy as np


def ku_scan(exps, eps1, eps2, has_eps2, out):
    b, np1 = exps.shape
    n = np1 - 1
    dn = float(n)
    s = np.cumsum(exps, axis=1)
    inv = 1.0 / s[:, n]
    u = s[:, :n] * inv[:, None]

    prev = np.empty_like(u)
    prev[:, 0] = 0.0
    prev[:, 1:] = u[:, :-1]
    bad = ~((u > prev) & (u < 1.0)).all(axis=1)

    j = np.arange(n, dtype=np.float64)  # i - 1
    upper = eps1 + ((1.0 - eps1) * j) / dn
    fail = u > upper
    if has_eps2:
        mi = np.minimum(j + 1.0, dn - 1.0)  # min(i, n-1)
        lower = ((1.0 + eps2) * mi) / dn - eps2
        fail |= u < lower
    first = np.where(fail.any(axis=1), fail.argmax(axis=1), n)
    out[:] = np.where(bad, -1, first)


def kc_scan(u, f_grid, p_grid, c0, lo, hi, scratch, out):
    b, n = u.shape
    nper = len(p_grid)
    dper = np.searchsorted(f_grid, u, side="right") - 1
    offsets = dper + np.arange(b)[:, None] * nper
    counts = np.bincount(offsets.ravel(), minlength=b * nper).reshape(b, nper)
    dead_by = np.cumsum(counts, axis=1)

    out[:] = n
    c = np.full(b, c0)
    lprev = np.full(b, n, dtype=np.int64)
    alive = np.ones(b, dtype=bool)
    for s in range(1, nper + 1):
        ls = n - dead_by[:, s - 1]
        alive &= ls != 0  # extinct paths keep k = n
        if not alive.any():
            break
        act = np.nonzero(alive)[0]
        phat = ls[act] / lprev[act]
        cnew = c[act] * (p_grid[s - 1] / phat)
        c[act] = cnew
        breach = (cnew < lo) | (cnew > hi)
        if breach.any():
            hit = act[breach]
            out[hit] = n - ls[hit]
            alive[hit] = False
        lprev[act] = ls[act]


def psi_scan(z, sqrt_dt, j2, b1, b2, has_lower, out):
    w = np.cumsum(z * sqrt_dt, axis=1)
    ok = w.max(axis=1) <= b1
    if has_lower and j2 > 0:
        ok &= w[:, :j2].min(axis=1) >= -b2
    out[:] = ok
