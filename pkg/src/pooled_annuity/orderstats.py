"""Uniform order statistics: exponential-spacing sampler, stability-band
prefix scan, and exact Beta-law quantiles for single order statistics.

The batch kernels in :mod:`pooled_annuity._kernels` evaluate the same band
on millions of paths at once; this module is the scalar reference they are
tested against, plus the pieces (sampling, quantiles) that are useful on
their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import draw_exponentials
from .special import inverse_regularized_incomplete_beta

__all__ = [
    "OrderedUniformSample",
    "sample_uniform_order_stats",
    "stable_prefix_uniform",
    "bound_crossing_index",
    "order_stat_quantile",
]


@dataclass(frozen=True)
class OrderedUniformSample:
    """Order statistics U_(1) < ... < U_(N) of N standard uniforms.

    Values must be strictly increasing and lie strictly inside (0, 1);
    exact ties (a measure-zero event under the continuous law) are
    rejected rather than broken arbitrarily.
    """

    values: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("sample must be a non-empty 1-d sequence")
        ok = bool(v[0] > 0.0 and v[-1] < 1.0 and np.all(np.diff(v) > 0.0))
        if not ok:
            raise ValueError("values must be strictly increasing within (0, 1)")
        object.__setattr__(self, "values", tuple(v.tolist()))

    @property
    def size(self) -> int:
        return len(self.values)


def sample_uniform_order_stats(n: int, rng: np.random.Generator) -> OrderedUniformSample:
    """Draw all N uniform order statistics in one pass, without sorting.

    Uses ratios of cumulative sums of N+1 unit exponentials: with
    S_i = E_1 + ... + E_i, the vector (S_1/S_{N+1}, ..., S_N/S_{N+1}) has
    exactly the law of sorted i.i.d. uniforms.  Each attempt consumes n+1
    variates from ``rng``; a degenerate draw (tie or endpoint collision
    after rounding) discards the whole vector and redraws, matching the
    repair rule of the batch kernels so both stay stream-compatible.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    while True:
        exps = draw_exponentials(rng, 1, n + 1)[0]
        s = np.cumsum(exps)
        # Multiply by the reciprocal rather than divide: same op order as the
        # batch kernels, so identical seeds give bit-identical values.
        values = s[:n] * (1.0 / s[n])
        if values[0] > 0.0 and values[n - 1] < 1.0 and np.all(np.diff(values) > 0.0):
            return OrderedUniformSample(tuple(values.tolist()))


def stable_prefix_uniform(
    sample: OrderedUniformSample,
    eps_lower: float,
    eps_upper: float | None = None,
) -> int:
    """Length of the leading run of order statistics inside the band.

    Index i (1-based) is in-band when

        U_(i) <= eps_lower + (1 - eps_lower) * (i - 1) / N

    and, when ``eps_upper`` is given,

        U_(i) >= (1 + eps_upper) * min(i, N - 1) / N - eps_upper.

    Both comparisons are inclusive: a boundary hit still counts as stable.
    Returns the first failing index minus one, or N when every index holds.
    Omitting ``eps_upper`` drops the second constraint entirely (the limit
    of an infinitely generous upper threshold).
    """
    values = sample.values
    n = len(values)
    dn = float(n)
    # Same float expressions as the batch kernels (j is the 0-based index),
    # so scalar and batch scans agree bit-for-bit on every path.
    for j, u in enumerate(values):
        if u > eps_lower + ((1.0 - eps_lower) * j) / dn:
            return j
        if eps_upper is not None:
            mi = j + 1 if j + 1 < n else n - 1
            if u < ((1.0 + eps_upper) * mi) / dn - eps_upper:
                return j
    return n


def bound_crossing_index(n: int, eps: float) -> int:
    """First index at which the symmetric band is empty.

    With eps_lower = eps_upper = eps the lower bound overtakes the upper
    at i >= N + (1 - 1/eps) / 2; from that index on no value can satisfy
    both constraints, so the stable prefix always ends before it.  The
    result is clamped to [1, N].
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    i = math.ceil(n + (1.0 - 1.0 / eps) / 2.0)
    return min(max(i, 1), n)


def order_stat_quantile(i: int, n: int, p: float) -> float:
    """p-quantile of U_(i) for a sample of n uniforms.

    U_(i) follows Beta(i, n - i + 1); the quantile is the inverse of the
    regularized incomplete beta function, solved to well below 1e-10
    absolute tolerance.
    """
    if not 1 <= i <= n:
        raise ValueError("index must satisfy 1 <= i <= n")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    return inverse_regularized_incomplete_beta(float(i), float(n - i + 1), p)
