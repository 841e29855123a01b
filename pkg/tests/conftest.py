import math

import numpy as np
import pytest

from exosuit.presets import flexor_spec, torque_validation_setup
from exosuit.wristgeom import PlacementParams


@pytest.fixture
def table4():
    """Flexor muscle, placement and stretch coefficients of the torque rig."""
    return torque_validation_setup()


@pytest.fixture
def table4_placement():
    return PlacementParams(0.1947, 0.0493, 0.0830, 0.0338, 0.0399)


@pytest.fixture
def spec():
    return flexor_spec()


def cross_torque(p1, p2, F):
    """z-moment about O of a pull of magnitude F applied at p2 toward p1."""
    d = np.subtract(p1, p2)
    u = d / np.hypot(*d)
    return F * (p2[0] * u[1] - p2[1] * u[0])


def random_placement(rng):
    while True:
        d1, w1, d2, w2 = map(float, rng.uniform([0.05, 0.01, 0.01, 0.01], [0.25, 0.08, 0.10, 0.08]))
        rmax = min(math.hypot(d1, w1), math.hypot(d2, w2))
        rw = float(rng.uniform(0.1, 0.95)) * rmax
        try:
            return PlacementParams(d1, w1, d2, w2, rw)
        except ValueError:
            continue


# acceptance reporting: one pass/fail line per criterion
_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n, title = mark.args
    detail = ""
    if rep.failed:
        detail = str(rep.longrepr.reprcrash.message).splitlines()[0] if hasattr(rep.longrepr, "reprcrash") else "failed"
    _CRITERIA[n] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[n]
        line = f"criterion {n:2d} {status}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
