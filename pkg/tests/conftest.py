import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from infodist.structures import Garbling, InfoStructure

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def structures(draw, max_k=3, max_c=3, max_d=3, min_k=1):
    """Random float structures with every cell positive."""
    K = draw(st.integers(min_k, max_k))
    C = draw(st.integers(1, max_c))
    D = draw(st.integers(1, max_d))
    seed = draw(st.integers(0, 2**32 - 1))
    w = np.random.default_rng(seed).dirichlet(np.ones(K * C * D)).reshape(K, C, D)
    return InfoStructure(w)


@st.composite
def garblings(draw, n_src, n_tgt):
    seed = draw(st.integers(0, 2**32 - 1))
    rows = np.random.default_rng(seed).dirichlet(np.ones(n_tgt), size=n_src)
    return Garbling(rows)


def random_structure(rng, K=2, C=2, D=2):
    return InfoStructure(rng.dirichlet(np.ones(K * C * D)).reshape(K, C, D))


def random_garbling(rng, n, m):
    return Garbling(rng.dirichlet(np.ones(m), size=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
