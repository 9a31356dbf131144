"""Scalar special functions used by the order-statistic and approximation code.

Self-contained on purpose: the package's only runtime dependency is numpy,
and nothing here is performance critical (these run once per query, not once
per simulated path).
"""

import math

__all__ = [
    "log_beta",
    "regularized_incomplete_beta",
    "inverse_regularized_incomplete_beta",
    "normal_cdf",
    "normal_quantile",
]

_CF_TOL = 1e-14
_CF_MAX_ITER = 500
_FPMIN = 1e-300


def log_beta(a: float, b: float) -> float:
    """log B(a, b) via lgamma."""
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz scheme.

    Converges rapidly for x < (a+1)/(a+b+2); the caller applies the symmetry
    transformation outside that region.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Parameters
    ----------
    a, b : float
        Positive shape parameters.
    x : float
        Evaluation point in [0, 1].
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def _beta_log_pdf(a: float, b: float, x: float) -> float:
    return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - log_beta(a, b)


def inverse_regularized_incomplete_beta(a: float, b: float, p: float) -> float:
    """Solve I_x(a, b) = p for x in [0, 1].

    Safeguarded Newton iteration: the bracket [lo, hi] always contains the
    root, and any Newton step that leaves it (or fails to shrink fast enough)
    is replaced by a bisection step, so convergence is guaranteed well inside
    the 200-iteration cap.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if p < 0.0 or p > 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0

    # Rough normal-approximation start, clipped into the open interval.
    mean = a / (a + b)
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1.0)))
    x = min(max(mean + normal_quantile(p) * sd, 1e-8), 1.0 - 1e-8)
    lo, hi = 0.0, 1.0
    dx_old = 1.0
    f = regularized_incomplete_beta(a, b, x) - p
    for _ in range(200):
        if f > 0.0:
            hi = x
        elif f < 0.0:
            lo = x
        else:
            return x
        log_pdf = _beta_log_pdf(a, b, x)
        newton_ok = log_pdf > -700.0
        if newton_ok:
            dx = f / math.exp(log_pdf)
            x_new = x - dx
            if not (lo < x_new < hi) or abs(dx) > 0.5 * abs(dx_old):
                newton_ok = False
        if not newton_ok:
            x_new = 0.5 * (lo + hi)
            dx = x - x_new
        dx_old = dx
        x = x_new
        if abs(dx) < 1e-15 * max(1.0, abs(x)):
            return x
        f = regularized_incomplete_beta(a, b, x) - p
    raise ArithmeticError(
        "incomplete beta inversion failed to converge in 200 iterations"
    )


_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate in both tails (erfc based)."""
    return 0.5 * math.erfc(-x / _SQRT2)


# Rational approximation coefficients (Acklam), abs error ~1.15e-9 before
# refinement.
_ACKLAM_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ACKLAM_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ACKLAM_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ACKLAM_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Standard normal quantile (inverse CDF).

    Acklam's rational approximation polished with one Halley step against the
    erfc-based CDF; absolute error is far below 1e-10 over (0, 1).  The upper
    half maps to the lower by symmetry: 1 - p is exact for p >= 0.5, and the
    erfc residual only has full relative accuracy in the lower tail.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in the open interval (0, 1)")
    if p > 0.5:
        return -_normal_quantile_half(1.0 - p)
    return _normal_quantile_half(p)


def _normal_quantile_half(p: float) -> float:
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
            ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        )
    # One Halley step; the residual is evaluated with the high-accuracy CDF.
    # The density reciprocal is assembled in log space: exp(x^2/2) alone
    # overflows past |x| ~ 38 even when the full product is moderate.
    e = normal_cdf(x) - p
    if e == 0.0:
        return x
    u = math.copysign(math.exp(math.log(abs(e)) + 0.5 * x * x + _LOG_SQRT_2PI), e)
    if abs(u) > 1e-4 * max(1.0, abs(x)):
        # Residual is pure rounding noise (deep-denormal p); the rational
        # start is more trustworthy than a step of this size.
        return x
    return x - u / (1.0 + 0.5 * x * u)
