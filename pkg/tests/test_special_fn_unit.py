"""Unit tests for special_fn."""
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import numpy as np
import pytest
from scipy import stats

from exitwise.services import special_fn


class TestGaussianAndErf:
    def test_gauss_cdf_reference_value(self):
        assert special_fn.gauss_cdf(1.96) == pytest.approx(0.9750021048517795, abs=1e-12)

    def test_gauss_pdf_scalar_and_array(self):
        xs = np.linspace(-6, 6, 25)
        np.testing.assert_allclose(special_fn.gauss_pdf(xs), stats.norm.pdf(xs), rtol=1e-13)
        assert special_fn.gauss_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-15)

    def test_erf_values(self):
        assert special_fn.erf(0.0) == 0.0
        assert special_fn.erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-14)

    def test_erf_plus_erfc_is_one(self):
        for x in (-2.0, -0.3, 0.0, 0.7, 3.0):
            assert special_fn.erf(x) + special_fn.erfc(x) == pytest.approx(1.0, abs=1e-15)

    def test_scalar_input_returns_float(self):
        assert isinstance(special_fn.erfc(0.5), float)
        assert isinstance(special_fn.gauss_cdf(0.5), float)

    def test_erfcx_matches_definition(self):
        x = 1.5
        assert special_fn.erfcx(x) == pytest.approx(special_fn.erfc(x) * math.exp(x * x), rel=1e-12)
        assert math.isfinite(special_fn.erfcx(40.0))


class TestTheta:
    @staticmethod
    def _theta2_direct(q):
        return 2.0 * q ** 0.25 * sum(q ** (n * (n + 1)) for n in range(60))

    @staticmethod
    def _theta3_direct(q):
        return 1.0 + 2.0 * sum(q ** (n * n) for n in range(1, 60))

    @pytest.mark.parametrize("q", [0.01, 0.3, 0.5, 0.8])
    def test_theta_sums(self, q):
        assert special_fn.theta2_zero(q) == pytest.approx(self._theta2_direct(q), rel=1e-13)
        assert special_fn.theta3_zero(q) == pytest.approx(self._theta3_direct(q), rel=1e-13)

    def test_theta_at_zero_nome(self):
        assert special_fn.theta2_zero(0.0) == 0.0
        assert special_fn.theta3_zero(0.0) == 1.0

    def test_nome_out_of_range(self):
        with pytest.raises(ValueError):
            special_fn.theta3_zero(1.0)
        with pytest.raises(ValueError):
            special_fn.theta2_zero(-0.1)

    def test_truncation_asserted_in_debug(self, monkeypatch):
        monkeypatch.setattr(special_fn.Config, "DEBUG_CHECKS", True)
        monkeypatch.setattr(special_fn, "THETA_MAX_TERMS", 2)
        with pytest.raises(AssertionError):
            special_fn.theta2_zero(0.9)
        with pytest.raises(AssertionError):
            special_fn.theta3_zero(0.9)
        monkeypatch.setattr(special_fn.Config, "DEBUG_CHECKS", False)
        assert special_fn.theta3_zero(0.9) == pytest.approx(1.0 + 2.0 * (0.9 + 0.9 ** 4))


class TestEfficiencyBounds:
    def test_u1_small_time_is_just_above_three(self):
        u1 = special_fn.efficiency_bound_u1(0.1)
        assert 3.0 < u1 < 3.0 + 1e-9

    def test_u1_picks_up_floor_term(self):
        assert special_fn.efficiency_bound_u1(16.0) > 4.0

    def test_u2_dominates_envelope(self):
        for t in (0.8, 1.0, 3.0):
            assert special_fn.efficiency_bound_u2(t, 0.5) > special_fn.envelope_second_kind(t, 0.5)

    def test_u2_formula(self):
        t, x = 1.0, 0.5
        q = math.exp(-math.pi ** 2 * t / 8.0)
        expected = special_fn.envelope_second_kind(t, x) + 8.0 / (math.pi ** 2 * t) * (special_fn.theta3_zero(q) - 1.0)
        assert special_fn.efficiency_bound_u2(t, x) == pytest.approx(expected, rel=1e-14)

    def test_scaled_envelope(self):
        for t in (0.8, 2.0, 10.0):
            plain = special_fn.envelope_second_kind(t, 0.2)
            scaled = special_fn.envelope_second_kind_scaled(t, 0.2)
            assert scaled == pytest.approx(plain * math.exp(math.pi ** 2 * t / 8.0), rel=1e-12)

    def test_envelope_n0(self):
        # n0 = floor(2 sqrt(2) / (pi sqrt(t))) + 1
        assert special_fn.second_kind_n0(1.0) == 1
        assert special_fn.second_kind_n0(0.7) == 2

    def test_bounds_reject_non_positive_time(self):
        with pytest.raises(ValueError):
            special_fn.efficiency_bound_u1(0.0)
        with pytest.raises(ValueError):
            special_fn.efficiency_bound_u2(-1.0, 0.0)
