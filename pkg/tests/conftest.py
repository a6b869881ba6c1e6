"""Conftest: pin the environment before exitwise is imported."""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

os.environ.setdefault("EXITWISE_DEBUG", "1")
os.environ.setdefault("EXITWISE_THREADS", "2")
os.environ.setdefault("EXITWISE_LOG_LEVEL", "WARNING")

import pytest


@pytest.fixture
def params():
    from exitwise.services.conditional_position import SeriesParams
    return SeriesParams(t_c=0.7, t_e=0.5, max_terms=10000)


@pytest.fixture
def rng():
    from exitwise.services.rng_core import RngStream
    return RngStream(20240607, 0)
