import numpy as np
import pytest

from tomobss import ScattererParams, default_geometry, rayleigh_resolution


@pytest.fixture
def geom():
    return default_geometry()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_scatterers(geom, alpha=1.0, distance=1.0, first=40.0):
    rho = rayleigh_resolution(geom)
    return [ScattererParams(first, alpha), ScattererParams(first + distance * rho, 1.0)]


def random_stack(rng, n=9, m=50):
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
