import numpy as np
import pytest

from carnotcurv import CarnotAlgebra, Stratification, StructureConstants, heintze_extension
from carnotcurv.catalog import abelian, heis, sc_nilradical


def random_two_step(rng, n1, n2) -> CarnotAlgebra:
    """Generic 2-step algebra R^n1 + R^n2; Jacobi holds since V2 is central."""
    ents = []
    for i in range(n1):
        for j in range(i + 1, n1):
            for k in range(n2):
                ents.append((i, j, n1 + k, rng.standard_normal()))
    strat = Stratification((tuple(range(n1)), tuple(range(n1, n1 + n2))))
    return CarnotAlgebra(StructureConstants(n1 + n2, tuple(ents)), strat)


def random_layered_gram(rng, carnot: CarnotAlgebra) -> np.ndarray:
    gram = np.zeros((carnot.dim, carnot.dim))
    for lay in carnot.strat.layers:
        m = rng.standard_normal((len(lay), len(lay)))
        gram[np.ix_(lay, lay)] = m @ m.T + 0.5 * np.eye(len(lay))
    return gram


def horocyclic_gram(g0) -> np.ndarray:
    """Extend a nilradical metric by a unit vertical vector orthogonal to it."""
    n = len(g0)
    gram = np.zeros((n + 1, n + 1))
    gram[:n, :n] = g0
    gram[n, n] = 1.0
    return gram


def random_gram(rng, dim) -> np.ndarray:
    m = rng.standard_normal((dim, dim))
    return m @ m.T + 0.5 * np.eye(dim)


CATALOG = {
    "abelian1": lambda: abelian(1),
    "abelian3": lambda: abelian(3),
    "heis_c1": lambda: heis("C", 1),
    "heis_c2": lambda: heis("C", 2),
    "heis_qu1": lambda: heis("QU", 1),
    "heis_o1": lambda: heis("O", 1),
    "sc2": lambda: sc_nilradical(2),
    "sc3": lambda: sc_nilradical(3),
}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def heis_c1_ext():
    return heintze_extension(heis("C", 1))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
