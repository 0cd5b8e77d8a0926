"""Shared pytest configuration."""

import os

import hypothesis
import numpy as np
import pytest

SEED = 123456

hypothesis.settings.register_profile(
    "hierground",
    derandomize=True,
    deadline=None,
    print_blob=True,
    suppress_health_check=[hypothesis.HealthCheck.too_slow, hypothesis.HealthCheck.function_scoped_fixture],
)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "hierground"))


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setenv("HIERGROUND_THREADS", "1")
