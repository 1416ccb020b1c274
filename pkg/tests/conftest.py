import math
from functools import lru_cache

import pytest

from tailpole import distkit, exact, roots, scaling

# gamma = 1 family for Bernoulli(1/2): n = 2(s - sqrt(s))
FAMILY = {25: 40, 100: 180, 400: 760, 1600: 3120}


@pytest.fixture(scope="session")
def bern05():
    return distkit.bernoulli(0.5)


@pytest.fixture(scope="session")
def bern04():
    return distkit.bernoulli(0.4)


@pytest.fixture(scope="session")
def inst_f(bern05):
    return scaling.derive_params(180, 100, bern05)


@pytest.fixture(scope="session")
def inst_g(bern04):
    return scaling.derive_params(2, 1, bern04)


@pytest.fixture(scope="session")
def poles_f(inst_f):
    return roots.find_poles(inst_f, k_max=5)


@pytest.fixture(scope="session")
def poles_g(inst_g):
    return roots.find_poles(inst_g, k_max=0)


@pytest.fixture(scope="session")
def lindley_f(inst_f):
    return exact.stationary_lindley(inst_f)


@pytest.fixture(scope="session")
def lindley_g(inst_g):
    return exact.stationary_lindley(inst_g)


@lru_cache(maxsize=None)
def family_system(s):
    """Params and poles (k_max = 3) of the gamma = 1 instance at ``s``."""
    p = scaling.derive_params(FAMILY[s], s, distkit.bernoulli(0.5))
    return p, roots.find_poles(p, k_max=3)


@lru_cache(maxsize=None)
def family_lindley(s):
    return exact.stationary_lindley(family_system(s)[0])


def level(s, L):
    """``N = ceil(L sqrt(s))``."""
    return math.ceil(L * math.sqrt(s))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
