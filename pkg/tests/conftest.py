from typing import Callable, List

import numpy as np
import pytest

from exact_linalg import RatMatrix, inverse
from holonomy_action import Generator, Representation
from quadratic_space import QuadraticSpace

RANDOM_SEED = 20240611


def random_gram(rng: np.random.Generator, dim: int, negatives: int) -> RatMatrix:
    """diag(±1) under a random unipotent change of basis."""
    signs = [1] * (dim - negatives) + [-1] * negatives
    change = [[0] * dim for _ in range(dim)]
    for i in range(dim):
        change[i][i] = 1
        for j in range(i + 1, dim):
            change[i][j] = int(rng.integers(-1, 2))
    p = RatMatrix(change)
    return p.T @ RatMatrix.diagonal(signs) @ p


def random_infinitesimal(rng: np.random.Generator, gram: RatMatrix) -> Generator:
    n = gram.rows
    if rng.random() < 0.5:
        a = rng.integers(-2, 3, size=n)
        b = rng.integers(-2, 3, size=n)
        skew = [[int(a[i] * b[j] - b[i] * a[j]) for j in range(n)] for i in range(n)]
    else:
        skew = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                value = int(rng.integers(-2, 3))
                skew[i][j], skew[j][i] = value, -value
    return Generator.infinitesimal(inverse(gram) @ RatMatrix(skew))


def random_reflection(rng: np.random.Generator, space: QuadraticSpace) -> Generator:
    n = space.dim
    while True:
        v = [int(x) for x in rng.integers(-2, 3, size=n)]
        norm = space.pair(v, v)
        if norm != 0:
            break
    column = RatMatrix([[x] for x in v])
    return Generator.group(RatMatrix.identity(n) - (column @ column.T @ space.gram).scale(2 / norm))


def make_random_representation(rng: np.random.Generator, dim: int) -> Representation:
    negatives = int(rng.integers(0, dim + 1))
    space = QuadraticSpace(random_gram(rng, dim, negatives))
    generators = []
    for _ in range(int(rng.integers(1, 4))):
        if rng.random() < 0.5:
            generators.append(random_infinitesimal(rng, space.gram))
        else:
            generators.append(random_reflection(rng, space))
    return Representation(space, tuple(generators), f"random-{dim}-{negatives}")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(RANDOM_SEED)


@pytest.fixture
def random_representation() -> Callable[[np.random.Generator, int], Representation]:
    return make_random_representation


@pytest.fixture(scope="session")
def random_representations() -> List[Representation]:
    streams = np.random.SeedSequence(RANDOM_SEED).spawn(200)
    return [make_random_representation(np.random.default_rng(s), 2 + i % 5) for i, s in enumerate(streams)]
