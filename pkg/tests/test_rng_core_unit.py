"""Unit tests for rng_core: streams and the exit-time proposal."""
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import numpy as np
import pytest
from scipy import integrate

from exitwise.errors import InvalidParameter
from exitwise.services.rng_core import (
    TE_MAX,
    TE_MIN,
    Branch,
    RngStream,
    hhat_cdf,
    hhat_kappa_inv,
    hhat_pdf,
    sample_hhat,
)
from exitwise.services.special_fn import erfc
from exitwise.services.validation import ks_one_sample


class TestRngStream:
    def test_same_key_same_sequence(self):
        a, b = RngStream(42, 3), RngStream(42, 3)
        assert [a.uniform() for _ in range(20)] == [b.uniform() for _ in range(20)]

    def test_streams_are_distinct(self):
        a, b = RngStream(42, 3), RngStream(42, 4)
        assert [a.uniform() for _ in range(5)] != [b.uniform() for _ in range(5)]

    def test_seeds_are_distinct(self):
        a, b = RngStream(1, 0), RngStream(2, 0)
        assert a.gaussian() != b.gaussian()

    def test_for_sample_and_spawn(self):
        s = RngStream.for_sample(9, 5, offset=100)
        assert (s.seed, s.stream_id) == (9, 105)
        child = s.spawn(7)
        assert (child.seed, child.stream_id) == (9, 7)
        assert child.uniform() == RngStream(9, 7).uniform()

    def test_negative_seed_rejected(self):
        with pytest.raises(InvalidParameter):
            RngStream(-1)

    def test_uniform_ranges(self, rng):
        us = [rng.uniform() for _ in range(2000)]
        assert min(us) >= 0.0 and max(us) < 1.0
        ps = [rng.uniform_pos() for _ in range(2000)]
        assert min(ps) > 0.0 and max(ps) <= 1.0

    def test_exponential_mean(self, rng):
        draws = np.array([rng.exponential(2.0) for _ in range(20000)])
        assert draws.min() >= 0.0
        assert abs(draws.mean() - 0.5) < 0.02

    def test_exponential_needs_positive_rate(self, rng):
        with pytest.raises(InvalidParameter):
            rng.exponential(0.0)


class TestProposal:
    def test_kappa_inverse_reference(self):
        assert hhat_kappa_inv(0.5) == pytest.approx(2.4529458, abs=1e-5)

    @pytest.mark.parametrize("t_e", [0.01, TE_MAX + 0.5])
    def test_window_enforced(self, rng, t_e):
        with pytest.raises(InvalidParameter):
            sample_hhat(rng, t_e)

    def test_window_edges_accepted(self, rng):
        sample_hhat(rng, TE_MIN)
        sample_hhat(rng, TE_MAX)

    def test_branch_labels(self, rng):
        for _ in range(2000):
            draw = sample_hhat(rng, 0.5)
            assert draw.value > 0
            if draw.branch is Branch.SMALL_TIME:
                assert draw.value <= 0.5
            else:
                assert draw.value >= 0.5

    def test_small_branch_frequency(self, rng):
        n = 20000
        small = sum(sample_hhat(rng, 0.5).branch is Branch.SMALL_TIME for _ in range(n)) / n
        assert abs(small - erfc(1.0)) < 0.012

    def test_pdf_integrates_to_one(self):
        t_e = 0.5
        head, _ = integrate.quad(hhat_pdf, 0.0, t_e, args=(t_e,), epsabs=1e-13)
        tail, _ = integrate.quad(hhat_pdf, t_e, np.inf, args=(t_e,), epsabs=1e-13)
        assert head + tail == pytest.approx(1.0, abs=1e-8)

    def test_cdf_continuous_at_switch(self):
        t_e = 0.5
        assert hhat_cdf(t_e, t_e) == pytest.approx(hhat_cdf(t_e * (1 + 1e-12), t_e), abs=1e-10)
        assert hhat_cdf(60.0, t_e) == pytest.approx(1.0, abs=1e-12)
        assert hhat_cdf(0.0, t_e) == 0.0

    def test_cdf_matches_pdf(self):
        t_e = 0.5
        for t in (0.2, 0.5, 1.3):
            mass, _ = integrate.quad(hhat_pdf, 0.0, min(t, t_e), args=(t_e,), epsabs=1e-13)
            if t > t_e:
                extra, _ = integrate.quad(hhat_pdf, t_e, t, args=(t_e,), epsabs=1e-13)
                mass += extra
            assert hhat_cdf(t, t_e) == pytest.approx(mass, abs=1e-9)

    def test_draws_follow_cdf(self):
        n = 5000
        rng = RngStream(77, 1)
        draws = [sample_hhat(rng, 0.5).value for _ in range(n)]
        report = ks_one_sample(draws, lambda t: hhat_cdf(t, 0.5))
        assert report.statistic < 2.0 / math.sqrt(n)
