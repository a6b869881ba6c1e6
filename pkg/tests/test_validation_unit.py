"""Unit tests for the validation oracles and suites."""
import json
import math
import os
import sys
from types import SimpleNamespace
from unittest import mock

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import numpy as np
import pytest

from exitwise.errors import InvalidParameter, MaxStepsExceeded
from exitwise.services import validation as va
from exitwise.services.conditional_position import Interval, SeriesParams
from exitwise.services.diffusion_exit import build_drift_spec
from exitwise.services.drift_expr import resolve_drift
from exitwise.services.rng_core import RngStream


@pytest.fixture(scope="module")
def bm_spec():
    fns = resolve_drift("zero")
    return build_drift_spec(fns.mu, fns.mu_prime, Interval(-1.0, 1.0), name=fns.name)


class TestKs:
    def test_two_sample_same_law(self):
        gen = np.random.default_rng(1)
        report = va.ks_two_sample(gen.normal(size=2000), gen.normal(size=1500))
        assert report.statistic < 1.5 * report.threshold
        assert report.threshold == pytest.approx(1.628 * math.sqrt(3500 / (2000 * 1500)))
        assert (report.n1, report.n2) == (2000, 1500)

    def test_two_sample_different_law(self):
        gen = np.random.default_rng(2)
        report = va.ks_two_sample(gen.normal(size=2000), gen.normal(1.0, size=2000))
        assert not report.passed

    def test_one_sample(self):
        gen = np.random.default_rng(3)
        report = va.ks_one_sample(gen.uniform(size=1000), lambda u: min(max(u, 0.0), 1.0))
        assert report.statistic < 1.5 * report.threshold
        assert report.n2 is None

    def test_dominance(self):
        gen = np.random.default_rng(4)
        small, large = gen.normal(-0.5, size=2000), gen.normal(size=2000)
        assert va.ks_dominance(small, large).statistic < 1.5 * va.ks_dominance(small, large).threshold
        assert not va.ks_dominance(large, small).passed

    def test_pass_is_strict_at_threshold(self):
        n = 100
        threshold = 1.628 * math.sqrt(2 * n / (n * n))
        with mock.patch.object(va.stats, "ks_2samp", return_value=SimpleNamespace(statistic=threshold)):
            report = va.ks_two_sample(np.zeros(n), np.ones(n))
        assert report.statistic == report.threshold
        assert not report.passed

    def test_halves_of_one_sample_agree(self):
        gen = np.random.default_rng(5)
        passes = 0
        for _ in range(100):
            s = gen.exponential(size=1000)
            passes += va.ks_two_sample(s[:500], s[500:]).passed
        assert passes >= 95

    def test_needs_enough_samples(self):
        with pytest.raises(InvalidParameter):
            va.ks_two_sample(np.zeros(50), np.zeros(500))
        with pytest.raises(InvalidParameter):
            va.ks_one_sample(np.zeros(99), lambda y: 0.5)


class TestMoments:
    def test_summarize(self):
        m = va.summarize([1.0, 2.0, 3.0, 4.0])
        assert m.n == 4
        assert m.mean == pytest.approx(2.5)
        assert m.std == pytest.approx(math.sqrt(5.0 / 3.0))
        assert m.se == pytest.approx(m.std / 2.0)

    def test_summarize_needs_two(self):
        with pytest.raises(InvalidParameter):
            va.summarize([1.0])

    def test_proportion_se(self):
        assert va.proportion_se(0.5, 100) == pytest.approx(0.05)
        assert va.proportion_se(1.0, 100) == 0.0


class TestEuler:
    def test_batch_bias_is_upward(self, bm_spec):
        times, where = va.euler_exit_batch(bm_spec, 0.0, va.EulerConfig(dt=1e-3), 4000, RngStream(21, 0))
        assert set(np.unique(where)) <= {-1.0, 1.0}
        se = np.std(times, ddof=1) / math.sqrt(times.size)
        # discrete monitoring only delays detection
        assert np.mean(times) > 1.0 - 3 * se
        assert np.all(times > 0)

    def test_single_path(self, bm_spec):
        rng = RngStream(22, 0)
        cfg = va.EulerConfig(dt=1e-3)
        for _ in range(20):
            t, b = va.euler_exit(bm_spec, 0.5, cfg, rng)
            assert b in (-1.0, 1.0)
            assert t > 0
            assert round(t / cfg.dt) == pytest.approx(t / cfg.dt, abs=1e-6)

    def test_max_steps(self, bm_spec):
        cfg = va.EulerConfig(dt=1e-6, max_steps=5)
        with pytest.raises(MaxStepsExceeded):
            va.euler_exit(bm_spec, 0.0, cfg, RngStream(1, 0))
        with pytest.raises(MaxStepsExceeded):
            va.euler_exit_batch(bm_spec, 0.0, cfg, 10, RngStream(1, 0))

    def test_start_outside(self, bm_spec):
        with pytest.raises(InvalidParameter):
            va.euler_exit(bm_spec, 1.5, va.EulerConfig(), RngStream(1, 0))
        with pytest.raises(InvalidParameter):
            va.euler_exit_batch(bm_spec, -2.0, va.EulerConfig(), 5, RngStream(1, 0))

    @pytest.mark.parametrize("x", [-1.0, 1.0])
    def test_boundary_start_returns_at_once(self, bm_spec, x):
        rng = mock.Mock(wraps=RngStream(1, 0))
        assert va.euler_exit(bm_spec, x, va.EulerConfig(), rng) == (0.0, x)
        times, where = va.euler_exit_batch(bm_spec, x, va.EulerConfig(), 3, rng)
        np.testing.assert_array_equal(times, np.zeros(3))
        np.testing.assert_array_equal(where, np.full(3, x))
        rng.gaussians.assert_not_called()

    def test_config_validated(self):
        with pytest.raises(ValueError):
            va.EulerConfig(dt=0.0)


class TestReport:
    def test_check_and_report_dict(self):
        report = va.SuiteReport("brownian", 100, 7)
        report.add("a", 1.0, "<= 2", True)
        assert report.passed
        report.add("b", 3.0, "<= 2", False)
        assert not report.passed
        data = report.to_dict()
        assert data["checks"][1] == {"name": "b", "value": 3.0, "threshold": "<= 2", "pass": False}
        assert data["passed"] is False
        assert list(report.to_frame().columns) == ["name", "value", "threshold", "pass"]


class TestRunSuite:
    def test_unknown_suite(self):
        with pytest.raises(InvalidParameter):
            va.run_suite("cubic", 1000, 0)

    def test_too_small(self):
        with pytest.raises(InvalidParameter):
            va.run_suite("brownian", 10, 0)

    @pytest.mark.parametrize("suite", va.SUITES)
    def test_report_structure(self, suite):
        report = va.run_suite(suite, 150, 5, threads=1, params=SeriesParams())
        assert report.suite == suite
        assert (report.n, report.seed) == (150, 5)
        names = [c.name for c in report.checks]
        assert names and len(names) == len(set(names))
        assert all(isinstance(c.threshold, str) and math.isfinite(c.value) for c in report.checks)
        json.dumps(report.to_dict())
