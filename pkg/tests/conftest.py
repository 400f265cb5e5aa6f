import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from linecong.congruence import Congruence, Poly, fig1_congruence

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

U, V = Poly.u(), Poly.v()


@pytest.fixture
def fig1():
    return fig1_congruence()


@pytest.fixture
def linear():
    """b1 = v, b2 = u: hyperbolic everywhere, focal points at t = +-1."""
    return Congruence.bchart(V, U, domain=(-1, 1, -1, 1))


@pytest.fixture
def rotational():
    """b1 = v, b2 = -u: elliptic everywhere."""
    return Congruence.bchart(V, -U, domain=(-1, 1, -1, 1))


@pytest.fixture
def folded():
    """b1 = 2v + u^2, b2 = uv: parabolic curve v = -u^2/8 made of folded points."""
    return Congruence.bchart(2 * V + U * U, U * V, domain=(-1, 1, -1, 1))


@pytest.fixture
def cone():
    """b1 = b2 = 0: every line passes through the origin."""
    return Congruence.bchart(Poly.zero(), Poly.zero(), domain=(-1, 1, -1, 1))


def random_poly(rng, degree=3, scale=1.0):
    return Poly({(i, j): float(rng.uniform(-scale, scale)) for i in range(degree + 1) for j in range(degree + 1 - i)})


def random_affine(rng):
    while True:
        A = rng.normal(size=(3, 3))
        if abs(np.linalg.det(A)) > 0.3:
            return A, rng.normal(size=3)


# -- acceptance report ------------------------------------------------------------------------

ACCEPTANCE: dict = {}


def record(n: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {n:2d}  {title}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
