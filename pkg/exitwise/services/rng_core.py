"""
Random streams and the exit-time proposal.

Every stream is a numpy Generator over the counter-based Philox bit
generator keyed by (seed, stream_id), so a sample index maps to the same
variates whatever the thread count.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameter
from . import special_fn

# proposal window for t_e
TE_MIN = 4.0 / (9.0 * math.pi * math.pi)
TE_MAX = 1.0

_MASK64 = (1 << 64) - 1


class Branch(enum.Enum):
    SMALL_TIME = "small"
    LARGE_TIME = "large"


@dataclass(frozen=True)
class ProposalDraw:
    value: float
    branch: Branch


class RngStream:
    """Owns one independent stream of variates. Not shared across threads."""

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise InvalidParameter(f"seed and stream id must be non-negative (got {seed}, {stream_id})")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = ((self.stream_id & _MASK64) << 64) | (self.seed & _MASK64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @classmethod
    def for_sample(cls, seed: int, index: int, offset: int = 0) -> "RngStream":
        return cls(seed, offset + index)

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    def uniform(self) -> float:
        """U(0,1) on [0, 1)."""
        return self._gen.random()

    def uniform_pos(self) -> float:
        """U(0,1) on (0, 1]."""
        return 1.0 - self._gen.random()

    def gaussian(self) -> float:
        return self._gen.standard_normal()

    def exponential(self, rate: float) -> float:
        if rate <= 0:
            raise InvalidParameter(f"exponential rate must be positive, got {rate}")
        return self._gen.standard_exponential() / rate

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def gaussians(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(n)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def check_te(t_e: float):
    if not (TE_MIN <= t_e <= TE_MAX):
        raise InvalidParameter(f"t_e={t_e} outside [{TE_MIN:.6f}, {TE_MAX}]")


def sample_hhat(rng: RngStream, t_e: float) -> ProposalDraw:
    """Draw from the exit-time proposal: 1/G^2 below t_e, shifted exponential above."""
    check_te(t_e)
    g = rng.gaussian()
    if g != 0.0:
        y = 1.0 / (g * g)
        if y <= t_e:
            return ProposalDraw(y, Branch.SMALL_TIME)
    return ProposalDraw(t_e - (8.0 / (math.pi * math.pi)) * math.log(rng.uniform_pos()), Branch.LARGE_TIME)


def hhat_kappa_inv(t_e: float) -> float:
    """Normalising constant of the proposal relative to the exit-time density."""
    return (math.pi / 2.0) * special_fn.erf(math.sqrt(1.0 / (2.0 * t_e))) * math.exp(special_fn.PI2_OVER_8 * t_e)


def hhat_pdf(t: float, t_e: float) -> float:
    if t <= 0:
        return 0.0
    if t <= t_e:
        return t ** -1.5 * special_fn.gauss_pdf(1.0 / math.sqrt(t))
    small_mass = special_fn.erfc(1.0 / math.sqrt(2.0 * t_e))
    return (1.0 - small_mass) * special_fn.PI2_OVER_8 * math.exp(-special_fn.PI2_OVER_8 * (t - t_e))


def hhat_cdf(t: float, t_e: float) -> float:
    if t <= 0:
        return 0.0
    if t <= t_e:
        return special_fn.erfc(1.0 / math.sqrt(2.0 * t))
    small_mass = special_fn.erfc(1.0 / math.sqrt(2.0 * t_e))
    return small_mass + (1.0 - small_mass) * (1.0 - math.exp(-special_fn.PI2_OVER_8 * (t - t_e)))
