import numpy as np
import pytest

from gerbelab import cech, cup, torus
from gerbelab.cech import build_nerve

_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call":
        _acceptance[marker.args[0]] = (rep.passed, marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(_acceptance):
        passed, title = _acceptance[k]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {k:>2}. {title}")


@pytest.fixture(scope="session")
def circle3():
    return build_nerve(cech.circle_cover(3))


@pytest.fixture(scope="session")
def torus3():
    return build_nerve(cech.torus_cover(3))


@pytest.fixture(scope="session")
def octahedron():
    return cup.octahedral_nerve()


@pytest.fixture(scope="session")
def sphere_circle():
    return cup.sphere_circle()


@pytest.fixture(scope="session")
def t3_gerbe():
    return torus.cech_cocycle(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
