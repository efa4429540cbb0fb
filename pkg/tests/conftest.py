import numpy as np
import pytest

from powerplan import build_link_model, normalize
from powerplan.scenario_io import generate

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def system_of(scn):
    return normalize(build_link_model(scn), scn.sigma2, scn.gamma)


@pytest.fixture
def worked_system():
    from powerplan import NormalizedSystem

    return NormalizedSystem([[0.0, 0.2], [0.3, 0.0]], [0.1, 0.1], [1.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_system(rng, K, coupling=0.3):
    from powerplan import NormalizedSystem

    B = coupling * rng.uniform(size=(K, K))
    np.fill_diagonal(B, 0.0)
    return NormalizedSystem(B, rng.uniform(0.05, 0.5, K), rng.uniform(0.5, 2.0, K))


def feasible_scenarios(n, seed0=0, kmax=8):
    """First ``n`` feasible generated scenarios with K cycling over 1..kmax."""
    from powerplan import min_power_point

    out = []
    seed = seed0
    while len(out) < n:
        K = 1 + seed % kmax
        scn = generate(seed, K, max(1, K + (seed // kmax) % 3 - 1))
        sys_ = system_of(scn)
        if min_power_point(sys_).feasible:
            out.append((scn, sys_))
        seed += 1
    return out
