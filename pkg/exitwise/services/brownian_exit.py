"""
Exit time and exit side of Brownian motion from an interval.

The symmetric sampler draws tau for a start at the centre of [-1, 1] by
alternating-series rejection from the proposal in rng_core. A general
start is reduced to a chain of symmetric problems of half-width
D = distance to the nearest boundary.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from ..config import Config
from ..errors import AbortMaxTerms, InvalidParameter
from . import special_fn
from .conditional_position import Interval, SeriesParams, survival_probability
from .rng_core import Branch, RngStream, check_te, hhat_kappa_inv, sample_hhat
from .special_fn import PI2_OVER_8

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class SymmetricExitSample:
    tau: float
    n_s: int
    proposals: int = 1


@dataclass(frozen=True)
class ExitSample:
    time: float
    location: float
    n_as: int
    n_iter: int = 0


def pdf_tau_term(branch: Branch, n: int, t: float) -> float:
    """Term R_i(n, t) of the alternating exit-time series (i=1 small time, i=2 large time)."""
    if branch is Branch.SMALL_TIME:
        return (2.0 * n / t ** 1.5) * special_fn.gauss_pdf(n / math.sqrt(t))
    return (math.pi * n / 2.0) * math.exp(-n * n * PI2_OVER_8 * t)


def _term_ratio(branch: Branch, m: int, t: float) -> float:
    # R_i(m, t) / R_i(1, t)
    if branch is Branch.SMALL_TIME:
        return m * math.exp(-(m * m - 1) / (2.0 * t))
    return m * math.exp(-(m * m - 1) * PI2_OVER_8 * t)


def exit_time_pdf(t: float, x: float = 0.0) -> float:
    """Density of tau for Brownian motion from x on [-1, 1]."""
    if t <= 0:
        return 0.0
    if t <= Config.T_C:
        # images: sum over k of (-1)^(k+1) d_k t^{-3/2} phi(d_k / sqrt(t)), d_k = x - (2k+1)
        total = 0.0
        n = 0
        while n <= Config.MAX_TERMS:
            acc = 0.0
            for k in (n, -n - 1):
                d = x - (2 * k + 1)
                acc += (-1) ** (k + 1) * d * t ** -1.5 * special_fn.gauss_pdf(d / math.sqrt(t))
            total += acc
            if abs(acc) < 1e-17:
                break
            n += 1
        return max(0.0, total)
    total = 0.0
    k = 0
    while k <= Config.MAX_TERMS:
        m = 2 * k + 1
        weight = m * math.exp(-m * m * PI2_OVER_8 * t)
        total += weight * math.sin(m * (x + 1.0) * math.pi / 2.0)
        if weight < 1e-17:
            break
        k += 1
    return max(0.0, (math.pi / 2.0) * total)


def exit_time_cdf(t: float, x: float = 0.0) -> float:
    return 1.0 - survival_probability(t, x)


def _check_sandwich(lower_prev, upper_prev, lower, upper):
    slack = 1e-12
    if not (lower_prev - slack <= lower <= upper + slack and upper <= upper_prev + slack):
        raise AssertionError(
            f"sandwich lost monotonicity: L={lower_prev}->{lower}, U={upper_prev}->{upper}"
        )


def sample_exit_symmetric(params: SeriesParams, rng: RngStream) -> SymmetricExitSample:
    """tau for Brownian motion from 0 on [-1, 1]."""
    t_e = params.t_e
    check_te(t_e)
    kappa_e = 1.0 / hhat_kappa_inv(t_e)
    n_s = 0
    proposals = 0
    while True:
        draw = sample_hhat(rng, t_e)
        proposals += 1
        y = draw.value
        scale = 1.0 if draw.branch is Branch.SMALL_TIME else kappa_e
        v = rng.uniform()
        n = 0
        lower, upper = 0.0, 1.0
        accepted = False
        while v < scale * upper and not accepted:
            n += 1
            n_s += 1
            if n > params.max_terms:
                logger.error(f"exit time sandwich did not close: y={y}, v={v}")
                raise AbortMaxTerms("brownian_exit", params.max_terms, y=y, v=v, t_e=t_e)
            new_lower = upper - _term_ratio(draw.branch, 4 * n - 1, y)
            new_upper = new_lower + _term_ratio(draw.branch, 4 * n + 1, y)
            # the first lower bound may be negative near the bottom of the t_e window
            if Config.DEBUG_CHECKS and n > 1:
                _check_sandwich(lower, upper, new_lower, new_upper)
            lower, upper = new_lower, new_upper
            accepted = v <= scale * lower
        if accepted:
            return SymmetricExitSample(y, n_s, proposals)


def efficiency_bound_symmetric(t_e: float) -> float:
    """Upper bound on E[n_s] of the symmetric sampler."""
    check_te(t_e)
    s = 1.0 / math.sqrt(2.0 * t_e)
    return (math.sqrt(t_e / (2.0 * math.pi)) * math.exp(-1.0 / (2.0 * t_e))
            + 1.5 * special_fn.erfc(s)
            + (4.0 / math.pi) * math.exp(-PI2_OVER_8 * t_e)
            + (4.0 / (5.0 * math.pi)) * math.exp(-25.0 * PI2_OVER_8 * t_e) / (1.0 - math.exp(-5.0 * math.pi ** 2 * t_e)))


def efficiency_bound_asymmetric(t_e: float) -> float:
    """Upper bound on E[n_as] of sample_exit, uniform in the start."""
    return 2.0 * efficiency_bound_symmetric(t_e)


def expected_symmetric_iterations(t_e: float) -> float:
    """Exact E[n_s] of the symmetric sampler."""
    check_te(t_e)
    small = 0.0
    large = 0.0
    k = 0
    while k < 1000:
        m = 4 * k + 1
        a = 2.0 * special_fn.erfc(m / math.sqrt(2.0 * t_e))
        b = (4.0 / math.pi) * math.exp(-m * m * PI2_OVER_8 * t_e) / m
        small += a
        large += b
        if a + b < 1e-17:
            break
        k += 1
    return small + large


def sample_exit(x: float, iv: Interval, params: SeriesParams, rng: RngStream) -> ExitSample:
    """(tau, B_tau) for Brownian motion from x on iv."""
    if not iv.a <= x <= iv.b:
        raise InvalidParameter(f"start x={x} outside [{iv.a}, {iv.b}]")
    if x - iv.a <= DEGENERATE_TOL * iv.length:
        return ExitSample(0.0, iv.a, 0, 0)
    if iv.b - x <= DEGENERATE_TOL * iv.length:
        return ExitSample(0.0, iv.b, 0, 0)

    # distances to each end in the [-1, 1] frame
    xu = iv.to_unit(x)
    to_lower = xu + 1.0
    to_upper = 1.0 - xu
    elapsed = 0.0
    n_as = 0
    n_iter = 0
    while True:
        half = min(to_lower, to_upper)
        sym = sample_exit_symmetric(params, rng)
        n_as += sym.n_s
        n_iter += 1
        elapsed += half * half * sym.tau
        down = rng.uniform() < 0.5
        if down and to_lower <= to_upper:
            return ExitSample(iv.time_from_unit(elapsed), iv.a, n_as, n_iter)
        if not down and to_upper <= to_lower:
            return ExitSample(iv.time_from_unit(elapsed), iv.b, n_as, n_iter)
        if down:
            to_lower -= half
            to_upper += half
        else:
            to_lower += half
            to_upper -= half
