import random

import pytest

from nibe.bilinear import CurveGroup, ToyGroup
from nibe.ibe import SchemeConfig, setup


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture(scope="session")
def toy():
    return ToyGroup()


@pytest.fixture(scope="session")
def big_toy():
    # wide enough for ell=32 configurations
    return ToyGroup(2**61 - 1)


@pytest.fixture(scope="session")
def curve():
    return CurveGroup()


@pytest.fixture
def toy_scheme(toy, rng):
    config = SchemeConfig(n=4, ell=2)
    params, master = setup(config, toy, rng, oracle=True)
    return params, master


@pytest.fixture(scope="session")
def curve_scheme(curve):
    config = SchemeConfig(n=8, ell=32)
    return setup(config, curve, random.Random(99))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in results.values():
        terminalreporter.write_line(line)
