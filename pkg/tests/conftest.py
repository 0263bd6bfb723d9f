import math

import pytest

from schattenlab.geometry import ManifoldModel
from schattenlab.operators import Bessel, Compose, Multiply, OperatorSpec

# Independent oracles, evaluated once with 30-digit mpmath series summation.
PI_COTH_PI = 3.1533480949371623
BESSEL3_DIAG = 2.0248698431004061  # sum_k (1 + k^2)^(-3/2)
BESSEL3_ALT = 0.42746264653050320  # sum_k (-1)^k (1 + k^2)^(-3/2)
FIO_DIAG = 1.3747308818072866  # sum_k cos(0.7 k) J_0(0.2 k) (1 + k^2)^(-2)


@pytest.fixture
def t1():
    return ManifoldModel.torus(1)


@pytest.fixture
def t2():
    return ManifoldModel.torus(2)


@pytest.fixture
def s2():
    return ManifoldModel.sphere()


def two_plus_cos(n=1):
    zero = (0,) * n
    e1 = (1,) + (0,) * (n - 1)
    m1 = (-1,) + (0,) * (n - 1)
    return Multiply.from_coefficients({zero: 2.0, e1: 0.5, m1: 0.5}, n)


def bessel(s, n=1):
    return OperatorSpec(n, (Bessel(s),))


def mult_bessel(s, n=1):
    return OperatorSpec(n, (two_plus_cos(n), Bessel(s)))


def fio(s, tau=0.7, eps=0.0, n=1):
    t = tau if n == 1 else (tau,) * n
    return OperatorSpec(n, (Compose(t, eps), Bessel(s)))


def close(a, b, tol):
    return abs(a - b) <= tol


__all__ = ["PI_COTH_PI", "BESSEL3_DIAG", "BESSEL3_ALT", "FIO_DIAG", "math"]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
