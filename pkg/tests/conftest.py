import numpy as np
import pytest

from pinchlab.geometry import generate_icosphere, generate_spheroid, rescale_to_curvature_bound
from pinchlab.spectral import compute_spectrum


@pytest.fixture(scope="session")
def ico4():
    return generate_icosphere(4)


@pytest.fixture(scope="session")
def spec4(ico4):
    return compute_spectrum(ico4, 10)


@pytest.fixture(scope="session")
def ico3():
    return generate_icosphere(3)


@pytest.fixture(scope="session")
def spec3(ico3):
    return compute_spectrum(ico3, 10)


@pytest.fixture(scope="session")
def prolate12():
    S, _ = rescale_to_curvature_bound(generate_spheroid(1.2, 3))
    return S, compute_spectrum(S, 10)


def great_circle(X, i, j):
    return np.arccos(np.clip(np.einsum("ij,ij->i", X[i], X[j]), -1.0, 1.0))


# acceptance lines: (criterion, description, passed), printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, text, ok in sorted(ACCEPTANCE, key=lambda r: (int(r[0].rstrip("abcde")), r[0])):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {crit:>3}  {text}")
