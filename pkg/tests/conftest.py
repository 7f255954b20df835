import numpy as np
import pytest

from supconv.technology import Technology

FIG1_POINTS = (
    [[0.0, 0.0], [0.2, 0.5], [0.4, 0.0], [1.0, 0.0]],
    [[0.0, 0.0], [0.4, 0.6], [0.8, 0.0], [0.9, 0.5], [1.0, 0.0]],
)
FLAT_LEVEL = 2 ** (2 / 3) / 3


def fig1_firms():
    return [Technology.pwl_simplex(p) for p in FIG1_POINTS]


def fig2_firms():
    return [Technology.cobb_douglas([1 / 3, 2 / 3]), Technology.cobb_douglas([2 / 3, 1 / 3])]


def fig3_firms():
    return [Technology.leontief([2, 0.5]), Technology.leontief([1, 1]), Technology.leontief([0.5, 2])]


@pytest.fixture
def fig1():
    return fig1_firms()


@pytest.fixture
def fig2():
    return fig2_firms()


@pytest.fixture
def fig3():
    return fig3_firms()


def random_concave_pwl(rng, n_inner=None, lattice=50):
    """Concave pwl firm with breakpoints on a 1/lattice grid."""
    n_inner = rng.integers(1, 5) if n_inner is None else n_inner
    ts = np.sort(rng.choice(np.arange(1, lattice), size=n_inner, replace=False)) / lattice
    t = np.concatenate([[0.0], ts, [1.0]])
    slopes = np.sort(rng.uniform(-2.0, 2.0, t.size - 1))[::-1]
    y = np.concatenate([[0.0], np.cumsum(slopes * np.diff(t))])
    y = y - min(y.min(), 0.0) + rng.uniform(0.0, 0.3)
    return Technology.pwl_simplex(np.column_stack([t, y]).tolist())


def random_pwl(rng, n_inner=None, lattice=50):
    """Arbitrary (usually non-concave) nonnegative pwl firm on a 1/lattice grid."""
    n_inner = rng.integers(2, 6) if n_inner is None else n_inner
    ts = np.sort(rng.choice(np.arange(1, lattice), size=n_inner, replace=False)) / lattice
    t = np.concatenate([[0.0], ts, [1.0]])
    y = np.round(rng.uniform(0.0, 1.0, t.size), 2)
    return Technology.pwl_simplex(np.column_stack([t, y]).tolist())


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
