"""
Special functions used by the series samplers.

Gaussian density/CDF, error functions, truncated theta sums and the
efficiency bounds of the conditional-position sampler.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..config import Config


INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
PI2_OVER_8 = math.pi * math.pi / 8.0

THETA_TERM_TOL = 1e-16
THETA_MAX_TERMS = 200
THETA_CHECK_TOL = 1e-15


def _wrap(value, like):
    if np.ndim(like) == 0 and not isinstance(like, np.ndarray):
        return float(value)
    return value


def gauss_pdf(x):
    if isinstance(x, np.ndarray):
        return INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def gauss_cdf(x):
    return _wrap(special.ndtr(x), x)


def erf(x):
    return _wrap(special.erf(x), x)


def erfc(x):
    return _wrap(special.erfc(x), x)


def erfcx(x):
    """exp(x^2) * erfc(x), finite for large x."""
    return _wrap(special.erfcx(x), x)


def _check_truncation(name: str, next_term: float, q: float):
    if next_term >= THETA_CHECK_TOL:
        raise AssertionError(f"{name} truncated with next term {next_term:.3e} (q={q})")


def theta2_zero(q: float) -> float:
    """Jacobi theta_2(0, q) = 2 q^{1/4} sum_{n>=0} q^{n(n+1)}."""
    if not 0.0 <= q < 1.0:
        raise ValueError(f"theta nome must lie in [0, 1), got {q}")
    if q == 0.0:
        return 0.0
    total = 0.0
    for n in range(THETA_MAX_TERMS):
        term = q ** (n * (n + 1))
        total += term
        if term < THETA_TERM_TOL:
            break
    if Config.DEBUG_CHECKS:
        _check_truncation("theta2", q ** ((n + 1) * (n + 2)), q)
    return 2.0 * q ** 0.25 * total


def theta3_zero(q: float) -> float:
    """Jacobi theta_3(0, q) = 1 + 2 sum_{n>=1} q^{n^2}."""
    if not 0.0 <= q < 1.0:
        raise ValueError(f"theta nome must lie in [0, 1), got {q}")
    total = 0.0
    for n in range(1, THETA_MAX_TERMS + 1):
        term = q ** (n * n)
        total += term
        if term < THETA_TERM_TOL:
            break
    if Config.DEBUG_CHECKS:
        _check_truncation("theta3", q ** ((n + 1) * (n + 1)), q)
    return 1.0 + 2.0 * total


def second_kind_n0(t: float) -> int:
    return int(math.floor(2.0 * math.sqrt(2.0) / (math.pi * math.sqrt(t)))) + 1


def envelope_second_kind(t: float, x: float) -> float:
    """Envelope constant of the spectral series on [-1, 1] for a start at x."""
    n0 = second_kind_n0(t)
    core = (8.0 * n0 / (math.pi * math.pi * t)) * math.exp(-n0 * n0 * PI2_OVER_8 * t)
    core += n0 ** 3 * math.exp(-PI2_OVER_8 * t)
    return (4.0 / math.pi) * math.sin(math.pi * (x + 1.0) / 2.0) * core


def envelope_second_kind_scaled(t: float, x: float) -> float:
    """envelope_second_kind multiplied by exp(pi^2 t / 8)."""
    n0 = second_kind_n0(t)
    core = (8.0 * n0 / (math.pi * math.pi * t)) * math.exp(-(n0 * n0 - 1) * PI2_OVER_8 * t)
    core += n0 ** 3
    return (4.0 / math.pi) * math.sin(math.pi * (x + 1.0) / 2.0) * core


def efficiency_bound_u1(t: float) -> float:
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    rt = math.sqrt(t)
    correction = rt / (2.0 * math.sqrt(2.0 * math.pi)) * theta2_zero(math.exp(-8.0 / t))
    return 3.0 + math.floor(rt / 4.0) + correction


def efficiency_bound_u2(t: float, x: float) -> float:
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    q = math.exp(-PI2_OVER_8 * t)
    return envelope_second_kind(t, x) + (8.0 / (math.pi * math.pi * t)) * (theta3_zero(q) - 1.0)
