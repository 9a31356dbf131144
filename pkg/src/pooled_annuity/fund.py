"""Closed pooled annuity fund: one-scenario simulation and stability measurement.

Two simulators produce the same income paths by construction: the recursion
form (income scales by true-over-observed survival each period) and the
explicit form (account values, longevity credits).  The explicit form exists
as an independent oracle for the recursion; both consume exactly one
``rng.random(n_members)`` call per path, so they can be driven by a shared
stream interchangeably.
"""

import math
from dataclasses import dataclass

import numpy as np

from .lifetable import (
    LifeTable,
    LifeTableError,
    annuity_factor_grid,
    survival_period_grid,
)

__all__ = [
    "FundParams",
    "StabilityCriterion",
    "IncomePath",
    "simulate_income_path",
    "simulate_income_path_explicit",
    "stable_prefix_deaths",
    "write_trace_csv",
]


@dataclass(frozen=True)
class FundParams:
    """Static configuration of the fund: N, x, W(0), R, periods per year."""

    n_members: int
    entry_age: int
    initial_wealth: float
    rate_per_period: float
    periods_per_year: int = 12

    def __post_init__(self):
        if self.n_members < 2:
            raise ValueError("n_members must be at least 2")
        if not self.initial_wealth > 0.0:
            raise ValueError("initial_wealth must be positive")
        if self.rate_per_period <= -1.0:
            raise ValueError("rate_per_period must exceed -1")
        if self.periods_per_year < 1:
            raise ValueError("periods_per_year must be a positive integer")


@dataclass(frozen=True)
class StabilityCriterion:
    """Income band parameters: lower threshold eps_lower, optional upper
    threshold eps_upper (absent means lower-threshold-only), certainty beta."""

    eps_lower: float
    eps_upper: float | None = None
    beta: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.eps_lower < 1.0:
            raise ValueError("eps_lower must lie in (0, 1)")
        if self.eps_upper is not None and not self.eps_upper > 0.0:
            raise ValueError("eps_upper must be positive when given")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")


@dataclass
class IncomePath:
    """One simulated scenario.

    death_times: sorted member death times in periods (real valued).
    survivors: survivor count at each integer period, through the first
        period with zero survivors.
    income: per-survivor income at each integer period while survivors exist.
    wealth: per-survivor account value (explicit simulator only).
    """

    death_times: np.ndarray
    survivors: np.ndarray
    income: np.ndarray
    wealth: np.ndarray | None = None

    @property
    def n_members(self) -> int:
        return len(self.death_times)


def _mortality_grids(table: LifeTable, x, periods_per_year: int):
    """Period-grid survival S, CDF F, and one-period survival p (cached upstream)."""
    s = survival_period_grid(table, x, periods_per_year)
    f = 1.0 - s
    p = np.divide(s[1:], s[:-1], out=np.zeros(len(s) - 1), where=s[:-1] > 0.0)
    return s, f, p


def _draw_death_data(params: FundParams, table: LifeTable, rng, f_grid):
    """One uniform per member -> death periods and exact death times (periods).

    The period index comes from the right-sided search of the period-grid
    CDF; the exact time inverts the survivorship function in the age domain
    (linear within each year under UDD).
    """
    n = params.n_members
    x = params.entry_age
    ppy = params.periods_per_year
    if not table.first_age <= x <= table.terminal_age:
        raise LifeTableError(f"table does not cover entry age {x}")
    u = rng.random(n)
    dper = np.searchsorted(f_grid, u, side="right") - 1

    # Exact inverse: find the death year, then the within-year fraction.
    l = table._survivorship
    base = l[x - table.first_age]
    if base == 0.0:
        raise LifeTableError(f"no survivors at entry age {x}")
    target = (1.0 - u) * base
    j = np.searchsorted(-l, -target, side="left")
    a_idx = np.maximum(j - 1, 0)
    la = l[a_idx]
    q = table._qx_array[np.minimum(a_idx, len(table.qx) - 1)]
    frac = (1.0 - target / la) / q
    t_years = (table.first_age + a_idx + frac) - x
    t_periods = np.maximum(t_years * ppy, 0.0)
    return u, dper, np.sort(t_periods, kind="stable")


def _survivor_series(n: int, dper: np.ndarray, n_periods: int):
    """Survivor counts L_0..L_E where E is the first period with L = 0."""
    counts = np.bincount(dper, minlength=n_periods)
    alive = n - np.cumsum(counts)
    ext = int(np.nonzero(alive == 0)[0][0])  # guaranteed: all die within the grid
    survivors = np.empty(ext + 2, dtype=np.int64)
    survivors[0] = n
    survivors[1:] = alive[: ext + 1]
    return survivors


def simulate_income_path(params: FundParams, table: LifeTable, rng: np.random.Generator) -> IncomePath:
    """Simulate one scenario through the income recursion.

    Per period, income multiplies by p/phat: the true one-period survival
    over the observed survivor ratio.  A zero-death period with p < 1 lowers
    income by exactly p; if observed survival matched p every period the
    income would stay constant.
    """
    x = params.entry_age
    ppy = params.periods_per_year
    _, f_grid, p_grid = _mortality_grids(table, x, ppy)
    _, dper, death_times = _draw_death_data(params, table, rng, f_grid)
    survivors = _survivor_series(params.n_members, dper, len(p_grid))

    a0 = annuity_factor_grid(table, x, params.rate_per_period, ppy)[0]
    n_inc = len(survivors) - 1  # periods with survivors
    income = np.empty(n_inc)
    income[0] = params.initial_wealth / a0
    c = income[0]
    for s in range(1, n_inc):
        phat = survivors[s] / survivors[s - 1]
        c = c * (p_grid[s - 1] / phat)
        income[s] = c
    return IncomePath(death_times=death_times, survivors=survivors, income=income)


def simulate_income_path_explicit(params: FundParams, table: LifeTable, rng: np.random.Generator) -> IncomePath:
    """Simulate one scenario through explicit per-survivor accounts.

    W(t+1) = (W(t) - C(t))(1+R) + M(t+1), with the longevity credit M
    redistributing the accounts of the period's deaths equally over the
    survivors, and C(t) = W(t)/a(t).  Independent oracle for
    :func:`simulate_income_path`; consumes the random stream identically.
    """
    x = params.entry_age
    ppy = params.periods_per_year
    r = params.rate_per_period
    _, f_grid, _ = _mortality_grids(table, x, ppy)
    _, dper, death_times = _draw_death_data(params, table, rng, f_grid)
    survivors = _survivor_series(params.n_members, dper, len(f_grid) - 1)

    a_grid = annuity_factor_grid(table, x, r, ppy)
    n_inc = len(survivors) - 1
    income = np.empty(n_inc)
    wealth = np.empty(n_inc)
    w = params.initial_wealth
    for s in range(n_inc):
        wealth[s] = w
        c = w / a_grid[s]
        income[s] = c
        deaths = survivors[s] - survivors[s + 1]
        if survivors[s + 1] == 0:
            break  # estates absorb the remaining accounts; no further income
        credit = (w - c) * (1.0 + r) * deaths / survivors[s + 1]
        w = (w - c) * (1.0 + r) + credit
    return IncomePath(death_times=death_times, survivors=survivors, income=income, wealth=wealth)


def stable_prefix_deaths(path: IncomePath, criterion: StabilityCriterion) -> int:
    """Number of deaths before the income first leaves the stability band.

    Returns the maximal k such that income stays within
    [(1-eps_lower)C(0), (1+eps_upper)C(0)] at every integer period up to
    floor(T_(k)); band comparisons are inclusive.  k = n_members when the
    band is never breached while survivors exist.
    """
    c0 = path.income[0]
    lo = (1.0 - criterion.eps_lower) * c0
    hi = (1.0 + criterion.eps_upper) * c0 if criterion.eps_upper is not None else math.inf
    n = path.n_members
    for s in range(1, len(path.income)):
        c = path.income[s]
        if c < lo or c > hi:
            return int(n - path.survivors[s])
    return n


def write_trace_csv(path: IncomePath, stream) -> None:
    """Dump `period,survivors,income` rows; income is blank once extinct."""
    stream.write("period,survivors,income\n")
    for s in range(len(path.survivors)):
        inc = repr(float(path.income[s])) if s < len(path.income) else ""
        stream.write(f"{s},{int(path.survivors[s])},{inc}\n")
