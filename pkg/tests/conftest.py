"""Shared fixtures: canonical sources and the seeded random corpus."""

import numpy as np
import pytest

from guesslab import PairSource, make_source

from _oracle import lattice_source

CORPUS_SEED = 20250825
CORPUS_SIZE = 20


@pytest.fixture(scope="session")
def bsc01() -> PairSource:
    """Uniform binary input through a binary symmetric channel, q = 0.1."""
    return make_source(["0", "1"], ["0", "1"], [[0.45, 0.05], [0.05, 0.45]])


@pytest.fixture(scope="session")
def uniform_binary() -> PairSource:
    """Uniform binary X with trivial side information."""
    return make_source(["0", "1"], ["y"], [[0.5], [0.5]])


@pytest.fixture(scope="session")
def noiseless() -> PairSource:
    """Y reveals X exactly; every guess succeeds on the first try."""
    return make_source(["0", "1"], ["0", "1"], [[0.5, 0.0], [0.0, 0.5]])


@pytest.fixture(scope="session")
def independent() -> PairSource:
    """X independent of Y; conditioning changes nothing."""
    return make_source(["0", "1"], ["0", "1"], [[0.35, 0.35], [0.15, 0.15]])


@pytest.fixture(scope="session")
def skew22() -> PairSource:
    """Asymmetric source whose top conditional level is tied in one column."""
    return make_source(["0", "1"], ["0", "1"], [[0.7, 0.1], [0.1, 0.1]])


@pytest.fixture(scope="session")
def corpus() -> list[PairSource]:
    """20 seeded lattice sources with |X| <= 4 and |Y| <= 3."""
    rng = np.random.default_rng(CORPUS_SEED)
    sources = []
    for _ in range(CORPUS_SIZE):
        x_size = int(rng.integers(2, 5))
        y_size = int(rng.integers(1, 4))
        sources.append(lattice_source(rng, x_size, y_size))
    return sources
