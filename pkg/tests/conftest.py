import numpy as np
import pytest

from blockdiag.blockstruct import BlockPartition
from blockdiag.harness import default_h0, generate_random_hermitian
from blockdiag.perturb import PerturbedHamiltonian


def random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_hermitian(rng, n):
    g = random_matrix(rng, n)
    return (g + g.conj().T) / 2


def make_instance(sizes=(3, 3, 2), seed=0, scale=1.0):
    partition = BlockPartition.from_sizes(sizes)
    h1 = generate_random_hermitian(partition.n, seed, scale)
    return PerturbedHamiltonian(default_h0(partition), h1, partition)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def partition332():
    return BlockPartition.from_sizes((3, 3, 2))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
