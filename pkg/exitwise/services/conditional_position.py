"""
Position at a fixed time of Brownian motion killed on leaving an interval.

The density on [-1, 1] has two series representations: the image series
("first kind"), fast for small t, and the spectral series ("second kind"),
fast for large t. Both are sampled exactly with the convergent series
method: draw Y from a proposal h, draw W = kappa * U * h(Y), add terms
until the partial sum is further than the remainder bound from W, and
accept iff W lies below the sum.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..config import Config
from ..errors import AbortMaxTerms, InvalidParameter
from . import special_fn
from .rng_core import TE_MAX, TE_MIN, RngStream
from .special_fn import PI2_OVER_8, gauss_cdf, gauss_pdf

logger = logging.getLogger(__name__)

BOUNDARY_MARGIN = 1e-9
DENSITY_TOL = 1e-14
MIN_TERMS = 16


class SeriesKind(enum.Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise InvalidParameter(f"interval needs finite a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def to_unit(self, x: float) -> float:
        return (2.0 * x - self.a - self.b) / (self.b - self.a)

    def from_unit(self, y: float) -> float:
        return 0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * y

    def time_to_unit(self, t: float) -> float:
        return 4.0 * t / (self.b - self.a) ** 2

    def time_from_unit(self, t: float) -> float:
        return t * (self.b - self.a) ** 2 / 4.0


UNIT = Interval(-1.0, 1.0)


class SeriesParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_c: float = Field(default_factory=lambda: Config.T_C, gt=0)
    t_e: float = Field(default_factory=lambda: Config.T_E)
    max_terms: int = Field(default_factory=lambda: Config.MAX_TERMS, ge=MIN_TERMS)

    @field_validator("t_e")
    @classmethod
    def _te_window(cls, v: float) -> float:
        if not (TE_MIN <= v <= TE_MAX):
            raise ValueError(f"t_e must lie in [{TE_MIN:.6f}, {TE_MAX}]")
        return v


@dataclass(frozen=True)
class DensityEval:
    value: float
    terms_used: int
    remainder_bound: float


@dataclass(frozen=True)
class ConditionalSample:
    position: float
    n_c: int
    candidates: int = 0
    kind: SeriesKind | None = None


# -- series terms ---------------------------------------------------------

def density_first_kind_term(n: int, t: float, x: float, y: float) -> float:
    """a_0 for n == 0, else the paired image terms a_n + a_{-n}."""
    rt = math.sqrt(t)
    if n == 0:
        return (gauss_pdf((x - y) / rt) - gauss_pdf((x + y - 2.0) / rt)) / rt
    four_n = 4.0 * n
    pos = gauss_pdf((x - y - four_n) / rt) - gauss_pdf((x + y - 2.0 - four_n) / rt)
    neg = gauss_pdf((x - y + four_n) / rt) - gauss_pdf((x + y - 2.0 + four_n) / rt)
    return (pos + neg) / rt


def density_second_kind_term(n: int, t: float, x: float, y: float) -> float:
    if n < 1:
        raise InvalidParameter(f"second kind terms start at n=1, got {n}")
    return (math.exp(-n * n * PI2_OVER_8 * t)
            * math.sin(n * math.pi * (x + 1.0) / 2.0)
            * math.sin(n * math.pi * (y + 1.0) / 2.0))


def _second_kind_term_scaled(n: int, t: float, x: float, y: float) -> float:
    return (math.exp(-(n * n - 1) * PI2_OVER_8 * t)
            * math.sin(n * math.pi * (x + 1.0) / 2.0)
            * math.sin(n * math.pi * (y + 1.0) / 2.0))


def remainder_first(n: int, t: float) -> float:
    if n < 1:
        raise InvalidParameter(f"first kind remainder bound needs n >= 1, got {n}")
    return 0.25 * special_fn.erfc((4.0 * n - 2.0) / math.sqrt(2.0 * t))


def remainder_first_leading(t: float, x: float, y: float) -> float:
    """Bound on the tail after a_0, valid at every y in [-1, 1]."""
    rt = math.sqrt(t)
    d1 = 4.0 - (x - y)
    d2 = x + y + 2.0
    upper = gauss_pdf(d1 / rt) / rt + 0.125 * special_fn.erfc(d1 / math.sqrt(2.0 * t))
    lower = gauss_pdf(d2 / rt) / rt + 0.125 * special_fn.erfc(d2 / math.sqrt(2.0 * t))
    return max(upper, lower)


def remainder_second(n: int, t: float) -> float:
    if n < 1:
        raise InvalidParameter(f"second kind remainder bound needs n >= 1, got {n}")
    return math.sqrt(2.0 / (math.pi * t)) * special_fn.erfc(n * math.pi * math.sqrt(t) / (2.0 * math.sqrt(2.0)))


def _remainder_second_scaled(n: int, t: float) -> float:
    z = n * math.pi * math.sqrt(t) / (2.0 * math.sqrt(2.0))
    return math.sqrt(2.0 / (math.pi * t)) * special_fn.erfcx(z) * math.exp(-(n * n - 1) * PI2_OVER_8 * t)


# -- envelope and proposal -----------------------------------------------

def envelope_kappa(t: float, x: float, kind: SeriesKind) -> float:
    if kind is SeriesKind.FIRST:
        return 3.0 + math.floor(math.sqrt(t) / 4.0)
    return special_fn.envelope_second_kind(t, x)


def proposal_density(t: float, x: float, y: float, kind: SeriesKind) -> float:
    if kind is SeriesKind.FIRST:
        rt = math.sqrt(t)
        return gauss_pdf((x - y) / rt) / rt
    if not -1.0 <= y <= 1.0:
        return 0.0
    return (math.pi / 4.0) * math.sin(math.pi * (y + 1.0) / 2.0)


def proposal_h(t: float, x: float, kind: SeriesKind, rng: RngStream) -> float:
    if kind is SeriesKind.FIRST:
        return x + math.sqrt(t) * rng.gaussian()
    return (2.0 / math.pi) * math.acos(1.0 - 2.0 * rng.uniform()) - 1.0


def select_kind(t_unit: float, t_c: float) -> SeriesKind:
    return SeriesKind.FIRST if t_unit <= t_c else SeriesKind.SECOND


# -- density and survival ------------------------------------------------

def density(t: float, x: float, y: float, kind: SeriesKind | None = None,
            tol: float = DENSITY_TOL, max_terms: int | None = None) -> DensityEval:
    """p(t, x, y) on [-1, 1], summed until the remainder bound drops below tol."""
    if t <= 0:
        raise InvalidParameter(f"density needs t > 0, got {t}")
    if not -1.0 <= y <= 1.0:
        return DensityEval(0.0, 0, 0.0)
    kind = kind or select_kind(t, Config.T_C)
    max_terms = max_terms or Config.MAX_TERMS
    total = 0.0
    if kind is SeriesKind.FIRST:
        total = density_first_kind_term(0, t, x, y)
        bound = remainder_first_leading(t, x, y)
        n = 0
        while bound > tol:
            n += 1
            if n > max_terms:
                raise AbortMaxTerms("density", max_terms, t=t, x=x, y=y, kind=kind.value)
            total += density_first_kind_term(n, t, x, y)
            bound = remainder_first(n, t)
        return DensityEval(max(total, 0.0), n + 1, bound)
    n = 0
    bound = math.inf
    while bound > tol:
        n += 1
        if n > max_terms:
            raise AbortMaxTerms("density", max_terms, t=t, x=x, y=y, kind=kind.value)
        total += density_second_kind_term(n, t, x, y)
        bound = remainder_second(n, t)
    return DensityEval(max(total, 0.0), n, bound)


def _interval_mass(lo: float, hi: float) -> float:
    """Phi(hi) - Phi(lo) without cancellation in the upper tail."""
    if lo > 0.0:
        return gauss_cdf(-lo) - gauss_cdf(-hi)
    return gauss_cdf(hi) - gauss_cdf(lo)


def _survival_image(t: float, x: float) -> float:
    rt = math.sqrt(t)

    def term(n: int) -> float:
        c = 4.0 * n
        return (_interval_mass((x - 1.0 - c) / rt, (x + 1.0 - c) / rt)
                - _interval_mass((x - 3.0 - c) / rt, (x - 1.0 - c) / rt))

    total = term(0)
    n = 1
    while n <= Config.MAX_TERMS:
        up, down = term(n), term(-n)
        total += up + down
        if abs(up) + abs(down) < 1e-17:
            break
        n += 1
    return total


def _survival_spectral(t: float, x: float) -> float:
    total = 0.0
    k = 0
    while k <= Config.MAX_TERMS:
        m = 2 * k + 1
        weight = math.exp(-m * m * PI2_OVER_8 * t) / m
        total += weight * math.sin(m * (x + 1.0) * math.pi / 2.0)
        if weight < 1e-17:
            break
        k += 1
    return (4.0 / math.pi) * total


def survival_probability(t: float, x: float) -> float:
    """P_x(tau > t) for Brownian motion started at x in [-1, 1]."""
    if t < 0:
        raise InvalidParameter(f"survival needs t >= 0, got {t}")
    if abs(x) >= 1.0:
        return 0.0
    if t == 0:
        return 1.0
    value = _survival_image(t, x) if t <= Config.T_C else _survival_spectral(t, x)
    return min(1.0, max(0.0, value))


# -- sampler -------------------------------------------------------------

def _check_start(x: float, iv: Interval) -> float:
    if not iv.a < x < iv.b:
        raise InvalidParameter(f"start x={x} must lie strictly inside [{iv.a}, {iv.b}]")
    xu = iv.to_unit(x)
    if 1.0 - abs(xu) <= BOUNDARY_MARGIN:
        raise InvalidParameter(f"start x={x} within {BOUNDARY_MARGIN:g} (scaled) of the boundary")
    return xu


def _sample_first_kind(t: float, x: float, params: SeriesParams, rng: RngStream):
    kappa = envelope_kappa(t, x, SeriesKind.FIRST)
    tail_one = remainder_first(1, t)
    n_c = 0
    candidates = 0
    while True:
        candidates += 1
        y = proposal_h(t, x, SeriesKind.FIRST, rng)
        u = rng.uniform()
        if not -1.0 < y < 1.0:
            continue
        w = kappa * u * proposal_density(t, x, y, SeriesKind.FIRST)
        s = density_first_kind_term(0, t, x, y)
        n_c += 1
        if abs(s - w) <= remainder_first_leading(t, x, y):
            n = 1
            s += density_first_kind_term(1, t, x, y)
            n_c += 1
            bound = tail_one
            while abs(s - w) <= bound:
                n += 1
                if n > params.max_terms:
                    logger.error(f"first kind series did not separate: t={t}, x={x}, y={y}")
                    raise AbortMaxTerms("conditional_position", params.max_terms, t=t, x=x, y=y, kind="first")
                s += density_first_kind_term(n, t, x, y)
                n_c += 1
                bound = remainder_first(n, t)
        if w <= s:
            return y, n_c, candidates


def _sample_second_kind(t: float, x: float, params: SeriesParams, rng: RngStream):
    # every quantity carries the factor exp(pi^2 t / 8)
    kappa = special_fn.envelope_second_kind_scaled(t, x)
    n_c = 0
    candidates = 0
    while True:
        candidates += 1
        y = proposal_h(t, x, SeriesKind.SECOND, rng)
        w = kappa * rng.uniform() * proposal_density(t, x, y, SeriesKind.SECOND)
        n = 1
        s = _second_kind_term_scaled(1, t, x, y)
        n_c += 1
        while abs(s - w) <= _remainder_second_scaled(n, t):
            n += 1
            if n > params.max_terms:
                logger.error(f"second kind series did not separate: t={t}, x={x}, y={y}")
                raise AbortMaxTerms("conditional_position", params.max_terms, t=t, x=x, y=y, kind="second")
            s += _second_kind_term_scaled(n, t, x, y)
            n_c += 1
        if w <= s:
            return y, n_c, candidates


def sample_unit(t: float, x: float, params: SeriesParams, rng: RngStream) -> ConditionalSample:
    """Sample on [-1, 1] given survival up to t (t > 0, |x| < 1)."""
    kind = select_kind(t, params.t_c)
    if kind is SeriesKind.FIRST:
        y, n_c, cands = _sample_first_kind(t, x, params, rng)
    else:
        y, n_c, cands = _sample_second_kind(t, x, params, rng)
    return ConditionalSample(y, n_c, cands, kind)


def sample_conditional(x: float, iv: Interval, t: float, params: SeriesParams,
                       rng: RngStream) -> ConditionalSample:
    """Position at time t of Brownian motion from x, conditioned on not leaving iv before t."""
    if not math.isfinite(t) or t < 0:
        raise InvalidParameter(f"t must be finite and >= 0, got {t}")
    xu = _check_start(x, iv)
    if t == 0:
        return ConditionalSample(x, 0, 0, None)
    draw = sample_unit(iv.time_to_unit(t), xu, params, rng)
    position = min(max(iv.from_unit(draw.position), iv.a), iv.b)
    return ConditionalSample(position, draw.n_c, draw.candidates, draw.kind)
