"""Income stability vs. membership size for closed pooled annuity funds."""

__version__ = "0.1.0"

from ._kernels import active_backend, available_backends, set_backend
from .approx import ApproxInputs, approx_k_u, approx_k_u_two_sided, floor_n, psi
from .estimator import (
    KDistribution,
    StabilityReport,
    death_time_spread,
    estimate_k_c,
    estimate_k_u,
    likely_time,
    relative_difference,
    time_difference,
)
from .fund import (
    FundParams,
    IncomePath,
    StabilityCriterion,
    simulate_income_path,
    simulate_income_path_explicit,
    stable_prefix_deaths,
    write_trace_csv,
)
from .lifetable import (
    LifeTable,
    LifeTableError,
    LifeTableLoadWarning,
    annuity_factor,
    annuity_factor_grid,
    inverse_cdf,
    load_life_table,
    make_gompertz_table,
    survival_period_grid,
    survival_probability,
)
from .orderstats import (
    OrderedUniformSample,
    bound_crossing_index,
    order_stat_quantile,
    sample_uniform_order_stats,
    stable_prefix_uniform,
)
from .special import normal_quantile

__all__ = [
    "__version__",
    "ApproxInputs",
    "FundParams",
    "IncomePath",
    "KDistribution",
    "LifeTable",
    "LifeTableError",
    "LifeTableLoadWarning",
    "OrderedUniformSample",
    "StabilityCriterion",
    "StabilityReport",
    "active_backend",
    "annuity_factor",
    "annuity_factor_grid",
    "approx_k_u",
    "approx_k_u_two_sided",
    "available_backends",
    "bound_crossing_index",
    "death_time_spread",
    "estimate_k_c",
    "estimate_k_u",
    "floor_n",
    "inverse_cdf",
    "likely_time",
    "load_life_table",
    "make_gompertz_table",
    "normal_quantile",
    "order_stat_quantile",
    "psi",
    "relative_difference",
    "sample_uniform_order_stats",
    "set_backend",
    "simulate_income_path",
    "simulate_income_path_explicit",
    "stable_prefix_deaths",
    "stable_prefix_uniform",
    "survival_period_grid",
    "survival_probability",
    "time_difference",
    "write_trace_csv",
]
