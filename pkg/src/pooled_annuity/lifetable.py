"""Life tables with uniform-distribution-of-deaths (UDD) fractional ages.

A table lists one-year death probabilities ``q_a`` for contiguous integer
ages.  The terminal row carries ``q = 1``: a member can reach the terminal
age alive but dies at some point within that final year.  All fractional-age
arithmetic interpolates the survivorship function linearly within each year
(``l(a + f) = l(a) * (1 - f * q_a)``), which makes survival probabilities
exactly composable and the duration CDF exactly invertible.
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

__all__ = [
    "LifeTable",
    "LifeTableError",
    "LifeTableLoadWarning",
    "load_life_table",
    "make_gompertz_table",
    "survival_probability",
    "annuity_factor",
    "inverse_cdf",
    "survival_period_grid",
    "annuity_factor_grid",
]


class LifeTableError(ValueError):
    """Raised for malformed table data or out-of-range queries."""


class LifeTableLoadWarning(UserWarning):
    """Flags terminal-row coercion or synthesis during loading."""


@dataclass(frozen=True)
class LifeTable:
    """One-year death probabilities for contiguous integer ages.

    ``qx[i]`` is the probability of dying within one year for a life aged
    ``first_age + i``.  The final entry must be exactly 1.
    """

    first_age: int
    qx: tuple[float, ...]

    def __post_init__(self):
        if len(self.qx) == 0:
            raise LifeTableError("life table must contain at least one age")
        for i, q in enumerate(self.qx):
            if not (0.0 <= q <= 1.0) or math.isnan(q):
                raise LifeTableError(f"q at age {self.first_age + i} out of range: {q!r}")
        if self.qx[-1] != 1.0:
            raise LifeTableError("q at the terminal age must equal 1")

    @property
    def terminal_age(self) -> int:
        return self.first_age + len(self.qx) - 1

    @cached_property
    def _survivorship(self) -> np.ndarray:
        # l at integer ages first_age .. terminal_age + 1, normalized l[0] = 1.
        # The terminal q of 1 forces the last entry to exactly 0.
        l = np.empty(len(self.qx) + 1)
        l[0] = 1.0
        np.cumprod(1.0 - np.asarray(self.qx), out=l[1:])
        l.flags.writeable = False
        return l

    @cached_property
    def _qx_array(self) -> np.ndarray:
        q = np.asarray(self.qx)
        q.flags.writeable = False
        return q


def _read_rows(source) -> list[tuple[int, float]]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8-sig", newline="") as fh:
            return _read_rows(fh)
    if isinstance(source, (bytes, bytearray)):
        return _read_rows(io.StringIO(source.decode("utf-8-sig")))
    if hasattr(source, "read") and isinstance(source.read(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8-sig", newline="")

    rows = []
    reader = csv.reader(source)
    header = None
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if header is None:
            header = [cell.strip().lower() for cell in row]
            if header != ["age", "qx"]:
                raise LifeTableError(f"expected header 'age,qx', got {','.join(header)!r}")
            continue
        if len(row) != 2:
            raise LifeTableError(f"line {lineno}: expected 2 columns, got {len(row)}")
        try:
            age = int(row[0].strip())
            q = float(row[1].strip())
        except ValueError as exc:
            raise LifeTableError(f"line {lineno}: malformed row {row!r}") from exc
        rows.append((age, q))
    if header is None:
        raise LifeTableError("empty life table file")
    return rows


def load_life_table(source) -> LifeTable:
    """Load a ``age,qx`` CSV into a :class:`LifeTable`.

    ``source`` may be a path, raw bytes, or an open text/binary stream.
    The last listed rate is coerced to exactly 1 when it is within 1e-12 of
    1; otherwise a synthetic terminal row at ``last_age + 1`` with ``q = 1``
    is appended.  Either adjustment is reported via
    :class:`LifeTableLoadWarning`.
    """
    rows = _read_rows(source)
    if not rows:
        raise LifeTableError("life table file contains no data rows")

    first_age = rows[0][0]
    qs = []
    for i, (age, q) in enumerate(rows):
        if age != first_age + i:
            raise LifeTableError(
                f"ages must be contiguous integers: expected {first_age + i}, got {age}"
            )
        if not (0.0 <= q <= 1.0) or math.isnan(q):
            raise LifeTableError(f"q at age {age} out of range: {q!r}")
        qs.append(q)

    if qs[-1] >= 1.0 - 1e-12:
        if qs[-1] != 1.0:
            warnings.warn(
                f"terminal q {qs[-1]!r} coerced to 1", LifeTableLoadWarning, stacklevel=2
            )
            qs[-1] = 1.0
    else:
        warnings.warn(
            f"appended synthetic terminal row at age {first_age + len(qs)} with q = 1",
            LifeTableLoadWarning,
            stacklevel=2,
        )
        qs.append(1.0)
    return LifeTable(first_age=first_age, qx=tuple(qs))


def make_gompertz_table(b: float, c: float, first_age: int = 0, max_age: int = 120) -> LifeTable:
    """Synthetic table from the exponential hazard b * c^age.

    Each one-year rate integrates the hazard over the year of age; the row
    at ``max_age`` is pinned to exactly 1 so the table closes.  Every rate
    is strictly positive, which the stability theory assumes.
    """
    if b <= 0.0 or c <= 1.0:
        raise LifeTableError("gompertz needs b > 0 and c > 1")
    if max_age <= first_age:
        raise LifeTableError("max_age must exceed first_age")
    logc = math.log(c)
    qx = [-math.expm1(-b * c**age * (c - 1.0) / logc) for age in range(first_age, max_age)]
    qx.append(1.0)
    return LifeTable(first_age=first_age, qx=tuple(qx))


def _survivor_fraction(table: LifeTable, age: float) -> float:
    """l(age) normalized so that l(first_age) = 1; 0 once the table is exhausted."""
    rel = age - table.first_age
    if rel < 0:
        raise LifeTableError(f"age {age} below table range (first age {table.first_age})")
    idx = int(rel)
    frac = rel - idx
    n = len(table.qx)
    if idx >= n:
        return 0.0
    l = table._survivorship[idx]
    if frac == 0.0:
        return float(l)
    return float(l * (1.0 - frac * table.qx[idx]))


def survival_probability(table: LifeTable, x, t, periods_per_year: int = 12) -> float:
    """Probability that a life aged ``x`` survives ``t`` periods.

    Durations convert to years as ``t / periods_per_year``; whole years
    multiply ``1 - q_a`` and any residual fraction ``f`` contributes
    ``1 - f * q_a`` (UDD).  Returns 0 once the duration exhausts the table.
    """
    if t < 0:
        raise LifeTableError("duration must be non-negative")
    if periods_per_year < 1:
        raise LifeTableError("periods_per_year must be a positive integer")
    base = _survivor_fraction(table, x)
    if base == 0.0:
        raise LifeTableError(f"no survivors at age {x}")
    if t == 0:
        return 1.0
    return _survivor_fraction(table, x + t / periods_per_year) / base


def annuity_factor(table: LifeTable, x_periods, rate_per_period: float, periods_per_year: int = 12) -> float:
    """Expected present value of 1 per period, paid at period starts, for life.

    Evaluates ``1 + sum_j (1+R)^(-j) * jp`` directly; the series stops when
    per-period survival from the attained age reaches 0, so the result is
    exactly 1 when no survival beyond the immediate payment is possible.
    """
    if rate_per_period <= -1.0:
        raise LifeTableError("rate_per_period must exceed -1")
    age = x_periods / periods_per_year
    base = _survivor_fraction(table, age)
    if base == 0.0:
        raise LifeTableError(f"no survivors at attained age {age}")
    v = 1.0 / (1.0 + rate_per_period)
    max_j = (table.terminal_age + 1 - int(age)) * periods_per_year + 1
    js = np.arange(1, max_j + 1)
    ages = age + js / periods_per_year
    surv = _survivor_fraction_vec(table, ages) / base
    nz = np.nonzero(surv == 0.0)[0]
    if nz.size:
        surv = surv[: nz[0]]
        js = js[: nz[0]]
    return 1.0 + float(np.dot(v ** js, surv))


def inverse_cdf(table: LifeTable, x, p: float) -> float:
    """Duration ``t`` in years with ``F(t) = p`` for the death-time CDF from age ``x``.

    Under UDD the survivorship function is piecewise linear and continuous,
    so the solution is found by locating the crossing year and inverting the
    linear segment.  Where the CDF has a flat stretch (a zero-mortality
    year), the smallest solution is returned.
    """
    if not (0.0 <= p < 1.0):
        raise LifeTableError("p must lie in [0, 1)")
    base = _survivor_fraction(table, x)
    if base == 0.0:
        raise LifeTableError(f"no survivors at age {x}")
    if p == 0.0:
        return 0.0
    target = (1.0 - p) * base
    l = table._survivorship
    # First integer age (index into l) where survivorship has fallen to the
    # target; l is non-increasing so search its negation.  searchsorted with
    # side='left' lands on the earliest such age, which yields the smallest
    # solution across zero-mortality plateaus.
    j = int(np.searchsorted(-l, -target, side="left"))
    if j == 0:
        return 0.0
    a_idx = j - 1
    la = l[a_idx]  # strictly above target, so the crossing year has q > 0
    q = table.qx[a_idx]
    f = (1.0 - target / la) / q
    t = table.first_age + a_idx + f - x
    return float(max(t, 0.0))


def _survivor_fraction_vec(table: LifeTable, ages: np.ndarray) -> np.ndarray:
    rel = ages - table.first_age
    if np.any(rel < 0):
        raise LifeTableError("age below table range")
    idx = rel.astype(int)
    frac = rel - idx
    n = len(table.qx)
    safe = np.minimum(idx, n - 1)
    out = table._survivorship[safe] * (1.0 - frac * table._qx_array[safe])
    return np.where(idx >= n, 0.0, out)


@lru_cache(maxsize=64)
def survival_period_grid(table: LifeTable, x, periods_per_year: int = 12) -> np.ndarray:
    """Survival probabilities from age ``x`` on the integer period grid.

    Entry ``t`` is ``tp_x`` with periods of ``1/periods_per_year`` years; the
    grid ends at the first period with zero survival (last entry exactly 0).
    Cached per (table, x, periods_per_year); treat the result as read-only.
    """
    base = _survivor_fraction(table, x)
    if base == 0.0:
        raise LifeTableError(f"no survivors at age {x}")
    max_t = (table.terminal_age + 1 - int(x)) * periods_per_year + 1
    ts = np.arange(max_t + 1)
    s = _survivor_fraction_vec(table, x + ts / periods_per_year) / base
    s[0] = 1.0
    zero = np.nonzero(s == 0.0)[0]
    s = s[: zero[0] + 1]
    s.flags.writeable = False
    return s


@lru_cache(maxsize=64)
def annuity_factor_grid(table: LifeTable, x, rate_per_period: float, periods_per_year: int = 12) -> np.ndarray:
    """Annuity factors at every period while survivors remain, from age ``x``.

    Built by the backward recursion ``a(t) = 1 + v * p_t * a(t+1)``, so the
    annuity identity holds to machine precision at every period; the direct
    series of :func:`annuity_factor` agrees with these values to ~1e-12.
    Cached; treat the result as read-only.
    """
    s = survival_period_grid(table, x, periods_per_year)
    v = 1.0 / (1.0 + rate_per_period)
    n = len(s) - 1  # periods with positive survival
    out = np.empty(n)
    out[n - 1] = 1.0
    for t in range(n - 2, -1, -1):
        out[t] = 1.0 + v * (s[t + 1] / s[t]) * out[t + 1]
    out.flags.writeable = False
    return out
