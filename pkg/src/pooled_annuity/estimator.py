"""Parallel Monte Carlo estimation of k_U and k_C, and calendar-time conversion.

Work is split into fixed-size blocks of paths; each block gets its own
random stream spawned from the master seed (SeedSequence), and per-block
histograms are merged by integer addition.  Block layout depends only on
(m, problem size), never on the worker count, so results are reproducible
for a given seed no matter how many threads run.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from json import dumps

import numpy as np

from . import _kernels
from .fund import FundParams, StabilityCriterion
from .lifetable import LifeTable, annuity_factor_grid, inverse_cdf, survival_period_grid, survival_probability
from .special import normal_quantile, regularized_incomplete_beta

__all__ = [
    "KDistribution",
    "StabilityReport",
    "estimate_k_u",
    "estimate_k_c",
    "relative_difference",
    "likely_time",
    "death_time_spread",
    "time_difference",
]

logger = logging.getLogger(__name__)

# Paths per block are sized so one block's random buffer stays around 16 MB.
_BLOCK_ELEMS = 1 << 21


def _block_sizes(m: int, elems_per_path: int) -> list[int]:
    bs = max(1, _BLOCK_ELEMS // elems_per_path)
    n_blocks = -(-m // bs)
    sizes = [bs] * n_blocks
    sizes[-1] = m - bs * (n_blocks - 1)
    return sizes


def _default_threads() -> int:
    return min(8, os.cpu_count() or 1)


def _run_blocks(m: int, elems_per_path: int, seed: int, worker, threads: int | None) -> np.ndarray:
    """Run `worker(rng, n_paths)` over every block and sum the histograms."""
    sizes = _block_sizes(m, elems_per_path)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    n_workers = threads if threads else _default_threads()
    logger.debug("running %d paths in %d blocks on %d threads", m, len(sizes), n_workers)

    def run(i: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(seeds[i]))
        return worker(rng, sizes[i])

    if n_workers == 1 or len(sizes) == 1:
        results = map(run, range(len(sizes)))
        return sum(results)
    with ThreadPoolExecutor(max_workers=n_workers) as ex:
        return sum(ex.map(run, range(len(sizes))))


@dataclass
class KDistribution:
    """Histogram of per-path stable-prefix values over k in {0..N}."""

    counts: np.ndarray
    n_paths: int
    seed: int

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if int(self.counts.sum()) != self.n_paths:
            raise ValueError("histogram counts must sum to n_paths")

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    def tail_counts(self) -> np.ndarray:
        """tail_counts[k] = number of paths with K >= k."""
        return self.counts[::-1].cumsum()[::-1]

    def tail_probability(self, k: int) -> float:
        return float(self.tail_counts()[k]) / self.n_paths

    def quantile(self, beta: float) -> int:
        """Largest k whose pathwise success frequency is at least beta."""
        ok = self.tail_counts() / self.n_paths >= beta
        return int(np.nonzero(ok)[0].max())

    def to_csv(self, stream) -> None:
        stream.write("k,count\n")
        for k, c in enumerate(self.counts):
            stream.write(f"{k},{int(c)}\n")


@dataclass
class StabilityReport:
    """The headline number k plus the settings that produced it."""

    mode: str  # "bound" for k_U, "direct" for k_C
    k_value: int
    beta: float
    criterion: StabilityCriterion
    standard_error_note: float
    n: int
    n_paths: int
    seed: int

    def to_json(self) -> str:
        payload = {
            "mode": self.mode,
            "k_value": self.k_value,
            "beta": self.beta,
            "criterion": {
                "eps_lower": self.criterion.eps_lower,
                "eps_upper": self.criterion.eps_upper,
                "beta": self.criterion.beta,
            },
            "standard_error_note": self.standard_error_note,
            "n": self.n,
            "n_paths": self.n_paths,
            "seed": self.seed,
        }
        return dumps(payload, sort_keys=True)


def _finish(mode: str, counts: np.ndarray, n: int, criterion: StabilityCriterion, m: int, seed: int):
    dist = KDistribution(counts=counts, n_paths=m, seed=seed)
    k = dist.quantile(criterion.beta)
    p_hat = dist.tail_probability(k)
    half_width = normal_quantile(0.995) * math.sqrt(p_hat * (1.0 - p_hat) / m)
    report = StabilityReport(
        mode=mode,
        k_value=k,
        beta=criterion.beta,
        criterion=criterion,
        standard_error_note=half_width,
        n=n,
        n_paths=m,
        seed=seed,
    )
    return report, dist


def estimate_k_u(
    n: int, criterion: StabilityCriterion, m: int, seed: int, threads: int | None = None
) -> tuple[StabilityReport, KDistribution]:
    """Monte Carlo estimate of k_U, the distribution-free stable-member count.

    Each path samples n uniform order statistics and measures how many lead
    the band defined by the criterion; k_U is the beta-quantile of that
    count.  No life table is involved, so the answer holds for any mortality
    model.  Deterministic given (inputs, seed) for any thread count.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if m < 1:
        raise ValueError("m must be at least 1")
    eps1, eps2 = criterion.eps_lower, criterion.eps_upper

    def worker(rng, n_paths):
        k = _kernels.ku_block(rng, n, n_paths, eps1, eps2)
        return np.bincount(k, minlength=n + 1)

    counts = _run_blocks(m, n + 1, seed, worker, threads)
    return _finish("bound", counts, n, criterion, m, seed)


def estimate_k_c(
    params: FundParams,
    table: LifeTable,
    criterion: StabilityCriterion,
    m: int,
    seed: int,
    threads: int | None = None,
) -> tuple[StabilityReport, KDistribution]:
    """Monte Carlo estimate of k_C from direct income-path simulation.

    Each path simulates the fund under the given table and counts deaths
    until the income first leaves the band; k_C is the beta-quantile of
    that count.  Deterministic given (inputs, seed) for any thread count.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    n = params.n_members
    x = params.entry_age
    ppy = params.periods_per_year
    s = survival_period_grid(table, x, ppy)
    f_grid = 1.0 - s
    p_grid = np.divide(s[1:], s[:-1], out=np.zeros(len(s) - 1), where=s[:-1] > 0.0)
    c0 = params.initial_wealth / annuity_factor_grid(table, x, params.rate_per_period, ppy)[0]
    lo = (1.0 - criterion.eps_lower) * c0
    hi = (1.0 + criterion.eps_upper) * c0 if criterion.eps_upper is not None else math.inf

    def worker(rng, n_paths):
        k = _kernels.kc_block(rng, n, n_paths, f_grid, p_grid, c0, lo, hi)
        return np.bincount(k, minlength=n + 1)

    counts = _run_blocks(m, n, seed, worker, threads)
    return _finish("direct", counts, n, criterion, m, seed)


def relative_difference(k_c: int, k_u: int) -> float:
    """(k_C - k_U)/k_U, the relative closeness of the bound."""
    if k_u < 1:
        raise ValueError("k_u must be at least 1")
    return (k_c - k_u) / k_u


def likely_time(table: LifeTable, x, n: int, k: int) -> float:
    """Years until the fraction k/n of an initial cohort has likely died."""
    if not 0 <= k < n:
        raise ValueError("k must satisfy 0 <= k < n")
    return inverse_cdf(table, x, k / n)


def death_time_spread(table: LifeTable, x, n: int, k: int, d: float) -> float:
    """P[T_(k) <= t - d] where t is the likely time of the k-th death.

    The k-th order statistic of n uniforms is Beta(k, n-k+1), so the
    probability is the regularized incomplete beta at F(t-d); 0 when the
    shifted time is not positive.
    """
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")
    if d < 0:
        raise ValueError("d must be non-negative")
    if k == n:
        t = float(table.terminal_age + 1 - x)
    else:
        t = likely_time(table, x, n, k)
    shifted = t - d
    if shifted <= 0.0:
        return 0.0
    f = 1.0 - survival_probability(table, x, shifted, periods_per_year=1)
    return regularized_incomplete_beta(k, n - k + 1, f)


def time_difference(table: LifeTable, x, n: int, k_c: int, k_u: int) -> float:
    """Additional likely time, in months, from using k_C instead of k_U."""
    return 12.0 * (likely_time(table, x, n, k_c) - likely_time(table, x, n, k_u))
