"""Fast approximations to the stable-member count.

Two routes around the full Monte Carlo estimate: a closed-form formula for
the lower-threshold-only criterion (normal approximation to the binomial
survivor count, with the band-crossing horizon folded in), and a Brownian
barrier-crossing probability ``psi`` whose inverse handles the two-sided
criterion.  Both scale to large pools where direct simulation gets slow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .estimator import _run_blocks
from .special import normal_quantile

__all__ = [
    "ApproxInputs",
    "floor_n",
    "normal_quantile",
    "approx_k_u",
    "psi",
    "approx_k_u_two_sided",
]

# Inversion never probes y above this, which caps the Brownian horizon near
# 10^3 time units and keeps auto-chosen step counts affordable.
_Y_CAP = 1.0 - 1e-3
_AUTO_STEPS_PER_UNIT = 10_000
_MAX_AUTO_STEPS = 400_000


@dataclass(frozen=True)
class ApproxInputs:
    """Pool size plus the stability-band parameters the formulas consume."""

    n: int
    eps_lower: float
    eps_upper: float | None = None
    beta: float = 0.9

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 < self.eps_lower < 1.0:
            raise ValueError("eps_lower must lie in (0, 1)")
        if self.eps_upper is not None and self.eps_upper <= 0.0:
            raise ValueError("eps_upper must be positive when given")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")


def _grid_index(u: float, n: int) -> int:
    """Largest i in {0..n} with i/n <= u (u >= 0)."""
    return min(int(math.floor(u * n)), n)


def floor_n(u: float, n: int) -> float:
    """Round u down to the grid {0, 1/n, 2/n, ..., 1}, capping at 1."""
    if u < 0.0:
        raise ValueError("u must be non-negative")
    if n < 1:
        raise ValueError("n must be at least 1")
    return _grid_index(u, n) / n


def approx_k_u(inputs: ApproxInputs) -> int:
    """Closed-form stand-in for the lower-threshold-only member count.

    Evaluates

        N * (1 - floor_N( (1/(1-eps)) * (1 - 1/(1 + (1/N)((1-eps)/eps)^2 *
                          Phi^{-1}((1-beta)/2)^2)) ))

    using ``eps_lower`` (the upper threshold plays no role here).  Exact
    integer arithmetic on the final grid step, so the result is an integer
    in [0, N].
    """
    n, eps = inputs.n, inputs.eps_lower
    q = normal_quantile((1.0 - inputs.beta) / 2.0)
    ratio = (1.0 - eps) / eps
    inner = 1.0 - 1.0 / (1.0 + (ratio * ratio / n) * (q * q))
    return n - _grid_index(inner / (1.0 - eps), n)


def _barriers_and_horizons(eps_lower, eps_upper, n, y):
    if not 0.0 <= y < 1.0:
        raise ValueError("y must lie in [0, 1)")
    h1 = 1.0 / ((1.0 - eps_lower) * (1.0 - y)) - 1.0
    if not math.isfinite(h1):
        raise ValueError("horizon is not finite for this y")
    b1 = math.sqrt(n) * eps_lower / (1.0 - eps_lower)
    if eps_upper is None:
        return h1, b1, 0.0, 0.0, False
    h2 = 1.0 / ((1.0 + eps_upper) * (1.0 - y)) - 1.0
    b2 = math.sqrt(n) * eps_upper / (1.0 + eps_upper)
    # A non-positive horizon means the lower constraint never binds.
    return h1, b1, h2, b2, h2 > 0.0


def _auto_steps(h1: float) -> int:
    return min(max(1000, math.ceil(_AUTO_STEPS_PER_UNIT * h1)), _MAX_AUTO_STEPS)


def psi(
    eps_lower: float,
    eps_upper: float | None,
    n: int,
    y: float,
    m_paths: int,
    steps: int | None,
    seed: int,
    threads: int | None = None,
) -> tuple[float, float]:
    """Brownian band non-crossing probability behind the two-sided formula.

    Estimates the chance that a standard Brownian motion stays at or below
    b1 = sqrt(N) eps1/(1-eps1) up to horizon 1/((1-eps1)(1-y)) - 1 while
    staying at or above -b2 = -sqrt(N) eps2/(1+eps2) up to the (shorter)
    horizon 1/((1+eps2)(1-y)) - 1.  ``eps_upper=None`` drops the lower
    barrier.  Paths are Euler walks with ``steps`` increments over the long
    horizon (``None`` picks roughly 10^4 per time unit, capped); discrete
    monitoring slightly under-counts crossings, a known bias of this
    scheme.  Returns (estimate, binomial standard error).
    """
    if not 0.0 < eps_lower < 1.0:
        raise ValueError("eps_lower must lie in (0, 1)")
    if eps_upper is not None and eps_upper <= 0.0:
        raise ValueError("eps_upper must be positive when given")
    if n < 1 or m_paths < 1:
        raise ValueError("n and m_paths must be at least 1")
    h1, b1, h2, b2, has_lower = _barriers_and_horizons(eps_lower, eps_upper, n, y)
    if steps is None:
        steps = _auto_steps(h1)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    dt = h1 / steps
    sqrt_dt = math.sqrt(dt)
    # Lower barrier monitored on the first j2 increments, i.e. times <= h2.
    j2 = min(int(h2 / dt), steps) if has_lower else 0

    def worker(rng, n_paths):
        ok = _kernels.psi_block(rng, n_paths, steps, sqrt_dt, j2, b1, b2, has_lower)
        return np.array([int(ok.sum())], dtype=np.int64)

    hits = int(_run_blocks(m_paths, steps, seed, worker, threads)[0])
    p = hits / m_paths
    return p, math.sqrt(p * (1.0 - p) / m_paths)


def approx_k_u_two_sided(
    inputs: ApproxInputs,
    m_paths: int = 100_000,
    steps: int | None = None,
    seed: int = 0,
    threads: int | None = None,
) -> int:
    """Two-sided stable-member approximation N * floor_N(psi^{-1}(beta)).

    Inverts y -> psi(..., y) by bisection to 1e-4 in y.  Every evaluation
    reuses the same seed and the same step count (common random numbers),
    which makes the estimated psi monotone in y per seed and the inverse
    well-defined.  ``steps=None`` resolves the step count once, from the
    horizon at y = 0.5, and keeps it fixed throughout.  Raises when beta
    exceeds the attainable range of psi.
    """
    n, e1, e2 = inputs.n, inputs.eps_lower, inputs.eps_upper
    beta = inputs.beta
    if steps is None:
        steps = _auto_steps(1.0 / ((1.0 - e1) * 0.5) - 1.0)

    def value(y: float) -> float:
        return psi(e1, e2, n, y, m_paths, steps, seed, threads)[0]

    lo, hi = 0.0, _Y_CAP
    if value(lo) < beta:
        raise ValueError("beta exceeds the attainable range of psi for these inputs")
    if value(hi) >= beta:
        return _grid_index(hi, n)
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        if value(mid) >= beta:
            lo = mid
        else:
            hi = mid
    return _grid_index(lo, n)
