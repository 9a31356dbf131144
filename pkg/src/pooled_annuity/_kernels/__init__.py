"""Scan-kernel backend selection plus the shared per-block drawing layer.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used.  Both expose the same scan functions over caller-provided
arrays, and all random numbers are drawn here (in numpy, identically for
either backend), so results never depend on which backend runs the scan.
"""

import numpy as np

from . import _pykernels

_BACKENDS = {"python": _pykernels}
try:
    from . import _ckernels

    _BACKENDS["cython"] = _ckernels
except ImportError:  # extension not built; numpy fallback stays active
    pass

_active_name = "cython" if "cython" in _BACKENDS else "python"
_active = _BACKENDS[_active_name]


def active_backend() -> str:
    return _active_name


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> None:
    """Force a backend (mainly for tests and the benchmark)."""
    global _active, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active_name = name
    _active = _BACKENDS[name]


def draw_exponentials(rng: np.random.Generator, n_paths: int, count: int) -> np.ndarray:
    """(n_paths, count) exponential variates as -log1p(-U), U uniform.

    log1p keeps full accuracy in the small-U tail; the transform runs in
    place on the uniform buffer.
    """
    u = rng.random((n_paths, count))
    np.negative(u, out=u)
    np.log1p(u, out=u)
    np.negative(u, out=u)
    return u


def ku_block(rng: np.random.Generator, n: int, n_paths: int, eps1: float, eps2) -> np.ndarray:
    """Stable-prefix lengths for a block of uniform-order-statistic paths.

    Each path consumes n+1 uniforms; degenerate rows (ties, which have
    probability ~0 but are possible in floating point) are redrawn from the
    same stream in ascending path order, keeping results reproducible.
    """
    has2 = eps2 is not None
    e2 = float(eps2) if has2 else 0.0
    exps = draw_exponentials(rng, n_paths, n + 1)
    out = np.empty(n_paths, dtype=np.int64)
    _active.ku_scan(exps, eps1, e2, has2, out)
    for idx in np.flatnonzero(out == -1):
        row = np.empty(1, dtype=np.int64)
        while True:
            _active.ku_scan(draw_exponentials(rng, 1, n + 1), eps1, e2, has2, row)
            if row[0] != -1:
                out[idx] = row[0]
                break
    return out


def kc_block(
    rng: np.random.Generator,
    n: int,
    n_paths: int,
    f_grid: np.ndarray,
    p_grid: np.ndarray,
    c0: float,
    lo: float,
    hi: float,
) -> np.ndarray:
    """Deaths-before-breach counts for a block of income paths.

    One uniform per member; death periods come from the right-sided search
    of the period-grid CDF ``f_grid``.
    """
    u = rng.random((n_paths, n))
    out = np.empty(n_paths, dtype=np.int64)
    scratch = np.zeros((1, len(p_grid)), dtype=np.int64)
    _active.kc_scan(u, f_grid, p_grid, c0, lo, hi, scratch, out)
    return out


def psi_block(
    rng: np.random.Generator,
    n_paths: int,
    steps: int,
    sqrt_dt: float,
    j2: int,
    b1: float,
    b2: float,
    has_lower: bool,
) -> np.ndarray:
    """Barrier-survival indicators for a block of Euler random-walk paths."""
    z = rng.standard_normal((n_paths, steps))
    out = np.empty(n_paths, dtype=np.uint8)
    _active.psi_scan(z, sqrt_dt, j2, b1, b2, has_lower, out)
    return out
