"""Deterministic random fixtures shared by several test modules."""

import numpy as np

from unimodality.kernels import CLASSICAL_KINDS
from unimodality.measures import AtomicMeasure, GriddedDensityMeasure, triangle, uniform


def random_measure(rng):
    choice = rng.integers(4)
    if choice == 0:
        n = int(rng.integers(1, 6))
        return AtomicMeasure.from_unnormalized(rng.uniform(-3, 3, n), rng.dirichlet(np.ones(n)) + 0.01)
    if choice == 1:
        l = rng.uniform(-2, 1)
        return uniform(l, l + rng.uniform(0.2, 3))
    if choice == 2:
        l, m, r = np.sort(rng.uniform(-2, 2, 3))
        return triangle(l, m, r + 0.1)
    grid = np.sort(rng.uniform(-2, 2, int(rng.integers(3, 8))))
    vals = rng.uniform(0, 1, grid.size)
    return GriddedDensityMeasure(grid, vals)


def classical_fixtures(n, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        kind = CLASSICAL_KINDS[int(rng.integers(3))]
        out.append((random_measure(rng), kind, float(np.exp(rng.uniform(np.log(0.1), np.log(5))))))
    return out


def random_atomic_unit(rng, n_min=3, n_max=6):
    n = int(rng.integers(n_min, n_max + 1))
    return AtomicMeasure.from_unnormalized(rng.uniform(0, 1, n), rng.dirichlet(np.ones(n)))
