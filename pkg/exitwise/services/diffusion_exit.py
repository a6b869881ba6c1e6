"""
Exact exit sampling for dX = mu(X) dt + dW on [a, b].

After the Girsanov change of measure the diffusion exit law is Brownian
exit law reweighted by beta(B_tau) * exp(-int_0^tau gamma(B_s) ds), with
gamma = (mu^2 + mu')/2 + rho. The exponential factor is simulated as a
Poisson-thinning event of rate gamma_plus >= sup gamma, the boundary factor
by a final Bernoulli(beta) test.

    DET    rho == 0, restart from x on any rejection
    KDET   time horizon kappa; exit or position at kappa
    GDET   iterate KDET from its capped positions until the boundary is hit
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from ..errors import (
    GammaEnvelopeTooSmall,
    InvalidParameter,
    NegativeGamma,
    NonIntegrableDrift,
    RhoNotZero,
)
from . import special_fn
from .brownian_exit import efficiency_bound_asymmetric, sample_exit
from .conditional_position import Interval, SeriesParams, sample_conditional, survival_probability
from .rng_core import RngStream

logger = logging.getLogger(__name__)

GRID_POINTS = 10_000
ENVELOPE_MARGIN = 1e-3
INTERP_TOL = 1e-9
QUAD_TOL = 1e-10
MAX_KNOTS = 2_000_000


@dataclass(frozen=True, eq=False)
class DriftSpec:
    mu: Callable
    mu_prime: Callable
    iv: Interval
    rho: float
    gamma_plus: float
    delta: float
    beta_sup: float
    knots: np.ndarray = field(repr=False)
    antiderivative: np.ndarray = field(repr=False)
    name: str = "drift"

    @property
    def beta_scale(self) -> float:
        return min(1.0, math.exp(-self.delta))

    def integral_to(self, x: float) -> float:
        """int_a^x mu, by linear interpolation in the antiderivative table."""
        return float(np.interp(x, self.knots, self.antiderivative))

    def gamma(self, x: float) -> float:
        m = float(self.mu(x))
        return 0.5 * (m * m + float(self.mu_prime(x))) + self.rho

    def beta(self, x: float) -> float:
        if x <= self.iv.a:
            return self.beta_scale
        if x >= self.iv.b:
            return min(1.0, math.exp(self.delta))
        return self.beta_scale * math.exp(self.integral_to(x))

    def beta_m(self, x: float) -> float:
        return min(1.0, self.beta(x) / self.beta_sup)


@dataclass(frozen=True)
class DiffusionExitSample:
    time: float
    location: float
    n_tot: int
    capped: bool = False
    restarts: int = 0


def _as_vector(fn: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(fn(xs), dtype=float)
    except (TypeError, ValueError):
        values = None
    if values is None or values.shape != xs.shape:
        # scalar-only callable
        values = np.fromiter((float(fn(float(v))) for v in xs), dtype=float, count=xs.size)
    return values


def _finite_difference(mu: Callable) -> Callable:
    def mu_prime(x):
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        return (mu(x + h) - mu(x - h)) / (2.0 * h)
    return mu_prime


def _antiderivative_table(mu: Callable, iv: Interval, slope: float):
    # linear interpolation error of int mu is at most h^2/8 * sup|mu'|
    n = GRID_POINTS
    if slope > 0:
        needed = int(math.ceil(iv.length * math.sqrt(slope / (8.0 * INTERP_TOL)))) + 1
        n = max(n, needed)
    if n > MAX_KNOTS:
        logger.warning(f"antiderivative table capped at {MAX_KNOTS} knots (needed {n})")
        n = MAX_KNOTS
    knots = np.linspace(iv.a, iv.b, n)
    values = _as_vector(mu, knots)
    if not np.all(np.isfinite(values)):
        raise NonIntegrableDrift(f"mu is not finite on [{iv.a}, {iv.b}]")
    table = integrate.cumulative_simpson(values, x=knots, initial=0.0)
    return knots, table


def build_drift_spec(mu: Callable, mu_prime: Callable | None, iv: Interval,
                     rho: float | None = None, gamma_plus: float | None = None,
                     name: str = "drift") -> DriftSpec:
    """Precompute everything the exit samplers need from a drift on iv."""
    if mu_prime is None:
        logger.warning(f"{name}: no derivative given, using central differences for mu'")
        mu_prime = _finite_difference(mu)

    grid = np.linspace(iv.a, iv.b, GRID_POINTS)
    mu_vals = _as_vector(mu, grid)
    dmu_vals = _as_vector(mu_prime, grid)
    if not (np.all(np.isfinite(mu_vals)) and np.all(np.isfinite(dmu_vals))):
        raise NonIntegrableDrift(f"{name}: mu or mu' not finite on [{iv.a}, {iv.b}]")

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            delta, err = integrate.quad(lambda s: float(mu(s)), iv.a, iv.b, epsabs=QUAD_TOL, limit=200)
        except (integrate.IntegrationWarning, ValueError, ZeroDivisionError) as e:
            raise NonIntegrableDrift(f"{name}: cannot integrate mu over [{iv.a}, {iv.b}]: {e}") from e
    if not math.isfinite(delta) or err > 1e3 * QUAD_TOL:
        raise NonIntegrableDrift(f"{name}: quadrature error {err:.3e} too large")

    knots, table = _antiderivative_table(mu, iv, float(np.max(np.abs(dmu_vals))))
    if abs(table[-1] - delta) > 1e-7 * max(1.0, abs(delta)):
        raise NonIntegrableDrift(f"{name}: antiderivative table {table[-1]:.12g} disagrees with quadrature {delta:.12g}")

    g0 = 0.5 * (mu_vals * mu_vals + dmu_vals)
    if rho is None:
        rho = max(0.0, -float(np.min(g0))) * (1.0 + ENVELOPE_MARGIN)
    if rho < 0:
        raise InvalidParameter(f"rho must be >= 0, got {rho}")
    gam = g0 + rho
    if float(np.min(gam)) < 0:
        raise NegativeGamma(f"{name}: gamma reaches {float(np.min(gam)):.6g} < 0 with rho={rho:.6g}")
    gamma_max = float(np.max(gam))
    if gamma_plus is None:
        gamma_plus = gamma_max * (1.0 + ENVELOPE_MARGIN)
    elif gamma_plus < gamma_max:
        raise GammaEnvelopeTooSmall(f"{name}: gamma_plus={gamma_plus:.6g} below sup gamma={gamma_max:.6g}")

    beta_scale = min(1.0, math.exp(-delta))
    beta_grid = beta_scale * np.exp(np.interp(grid, knots, table))
    beta_sup = max(float(np.max(beta_grid)), beta_scale, min(1.0, math.exp(delta)))

    spec = DriftSpec(mu=mu, mu_prime=mu_prime, iv=iv, rho=float(rho), gamma_plus=float(gamma_plus),
                     delta=float(delta), beta_sup=beta_sup, knots=knots, antiderivative=table, name=name)
    logger.info(
        f"{name} on [{iv.a}, {iv.b}]: rho={spec.rho:.6g}, gamma_plus={spec.gamma_plus:.6g}, "
        f"delta={spec.delta:.6g}, sup beta={spec.beta_sup:.6g}"
    )
    return spec


def _check_start(spec: DriftSpec, x: float):
    if not spec.iv.a < x < spec.iv.b:
        raise InvalidParameter(f"start x={x} must lie strictly inside [{spec.iv.a}, {spec.iv.b}]")


def _draw_event_time(spec: DriftSpec, rng: RngStream) -> float:
    if spec.gamma_plus == 0.0:
        return math.inf
    return rng.exponential(spec.gamma_plus)


def sample_det(spec: DriftSpec, x: float, params: SeriesParams, rng: RngStream,
               tilted: bool = False) -> DiffusionExitSample:
    """Exit time and position for rho == 0 drifts.

    With tilted=True a positive rho is allowed and the output follows the
    exit law reweighted by exp(-rho tau).
    """
    if spec.rho > 0 and not tilted:
        raise RhoNotZero(spec.rho)
    _check_start(spec, x)
    iv = spec.iv
    n_tot = 0
    restarts = 0
    while True:
        z = x
        elapsed = 0.0
        while True:
            e = _draw_event_time(spec, rng)
            ex = sample_exit(z, iv, params, rng)
            n_tot += ex.n_as
            u = rng.uniform()
            if ex.time < e:
                if u <= spec.beta(ex.location):
                    return DiffusionExitSample(elapsed + ex.time, ex.location, n_tot, False, restarts)
                break
            cond = sample_conditional(z, iv, e, params, rng)
            n_tot += cond.n_c
            v = rng.uniform()
            if spec.gamma_plus * v <= spec.gamma(cond.position):
                break
            z = cond.position
            elapsed += e
        restarts += 1


def sample_kdet(spec: DriftSpec, x: float, kappa: float, params: SeriesParams,
                rng: RngStream) -> DiffusionExitSample:
    """(min(tau, kappa), X at that time); capped marks a kappa-time interior position."""
    if not (math.isfinite(kappa) and kappa > 0):
        raise InvalidParameter(f"kappa must be finite and positive, got {kappa}")
    _check_start(spec, x)
    iv = spec.iv
    n_tot = 0
    restarts = 0
    while True:
        horizon = kappa
        z = x
        elapsed = 0.0
        while True:
            e = _draw_event_time(spec, rng)
            ex = sample_exit(z, iv, params, rng)
            n_tot += ex.n_as
            u = rng.uniform()
            s = ex.time
            if s <= horizon and s <= e:
                w = rng.uniform()
                if u <= spec.beta_m(ex.location) and w <= math.exp(-spec.rho * (horizon - s)):
                    return DiffusionExitSample(min(elapsed + s, kappa), ex.location, n_tot, False, restarts)
                break
            if horizon <= e:
                cond = sample_conditional(z, iv, horizon, params, rng)
                n_tot += cond.n_c
                if u <= spec.beta_m(cond.position):
                    return DiffusionExitSample(kappa, cond.position, n_tot, True, restarts)
                break
            cond = sample_conditional(z, iv, e, params, rng)
            n_tot += cond.n_c
            v = rng.uniform()
            if spec.gamma_plus * v <= spec.gamma(cond.position):
                break
            z = cond.position
            elapsed += e
            horizon -= e
        restarts += 1


def default_kappa(spec: DriftSpec) -> float:
    if spec.rho > 0:
        return 1.0 / spec.rho
    return spec.iv.length ** 2


def sample_gdet(spec: DriftSpec, x: float, params: SeriesParams, rng: RngStream,
                kappa: float | None = None) -> tuple[DiffusionExitSample, int]:
    """Exit time and position for any admissible rho, with the number of KDET rounds."""
    kappa = default_kappa(spec) if kappa is None else kappa
    if not (math.isfinite(kappa) and kappa > 0):
        raise InvalidParameter(f"kappa must be finite and positive, got {kappa}")
    z = x
    elapsed = 0.0
    n_tot = 0
    restarts = 0
    n_it = 0
    while True:
        step = sample_kdet(spec, z, kappa, params, rng)
        n_it += 1
        elapsed += step.time
        n_tot += step.n_tot
        restarts += step.restarts
        if not step.capped:
            return DiffusionExitSample(elapsed, step.location, n_tot, False, restarts), n_it
        z = step.location


# -- efficiency bounds ---------------------------------------------------

def laplace_cosh(gamma_plus: float, iv: Interval) -> float:
    """Lower bound on E_x[exp(-gamma_plus tau)], uniform in x."""
    return 1.0 / math.cosh(math.sqrt(gamma_plus / 2.0) * iv.length)


def laplace_capped(gamma_plus: float, iv: Interval, kappa: float) -> float:
    """E[exp(-gamma_plus min(tau, kappa))] for Brownian motion from the midpoint."""
    if gamma_plus == 0:
        return 1.0

    def integrand(s):
        return math.exp(-gamma_plus * s) * survival_probability(iv.time_to_unit(s), 0.0)

    value, _ = integrate.quad(integrand, 0.0, kappa, limit=200)
    return 1.0 - gamma_plus * value


def efficiency_constant(params: SeriesParams) -> float:
    """C0(t_e) + C1(t_c): sup over t of the conditional-sampler bounds plus the exit-sampler bound."""
    grid = np.geomspace(1e-4, 1e3, 400)
    c1 = 0.0
    for t in grid:
        if t <= params.t_c:
            c1 = max(c1, special_fn.efficiency_bound_u1(t))
        else:
            c1 = max(c1, special_fn.efficiency_bound_u2(t, 0.0))
    c1 = max(c1, special_fn.efficiency_bound_u1(params.t_c))
    c1 = max(c1, special_fn.efficiency_bound_u2(params.t_c * (1.0 + 1e-12), 0.0))
    return efficiency_bound_asymmetric(params.t_e) + c1


def efficiency_bound_det(spec: DriftSpec, x: float, params: SeriesParams, rng: RngStream,
                         mc_samples: int = 1000) -> float:
    """Upper bound on E[n_tot] of DET from x; E_x[exp(-rho tau)] is estimated with GDET."""
    _check_start(spec, x)
    if spec.rho == 0:
        tilt = 1.0
    else:
        taus = np.array([sample_gdet(spec, x, params, rng)[0].time for _ in range(mc_samples)])
        tilt = float(np.mean(np.exp(-spec.rho * taus)))
    return efficiency_constant(params) / (tilt * laplace_cosh(spec.gamma_plus, spec.iv))


def efficiency_bound_kdet(spec: DriftSpec, x: float, kappa: float, params: SeriesParams) -> float:
    """Upper bound on E[n_tot] of KDET from x with horizon kappa."""
    _check_start(spec, x)
    denom = spec.beta_m(x) * laplace_capped(spec.gamma_plus, spec.iv, kappa)
    if denom <= 0:
        return math.inf
    return efficiency_constant(params) * math.exp(spec.rho * kappa) / denom
