import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from chanholo.discrete import ChannelSequence
from chanholo.kraus import random_channel

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_sequence(rng, n, d, k):
    return ChannelSequence(random_channel(d, k, rng) for _ in range(n))


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_state(rng, d):
    z = random_matrix(rng, d)
    r = z @ z.conj().T
    return r / np.trace(r)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
