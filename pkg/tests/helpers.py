"""Shared builders and dense oracles for the test suite.

Everything here works on materialized numpy arrays through plain
reshape/moveaxis/einsum calls, independent of the factored code paths it
is used to check.
"""

import numpy as np

from cptt import CpTensor, Grid, PureTensor


def random_cp(dims, rank, rng, scale=1.0):
    """Random CP tensor with standard-normal weights and factors."""
    grid = Grid(tuple(dims))
    weights = scale * rng.standard_normal(rank)
    factors = tuple(rng.standard_normal((n, rank)) for n in grid.dims)
    return CpTensor(grid, weights, factors)


def random_pure(dims, rng, weight=None):
    grid = Grid(tuple(dims))
    w = float(rng.standard_normal()) if weight is None else weight
    return PureTensor(grid, w, tuple(rng.standard_normal(n) for n in grid.dims))


def dense_of(a: CpTensor) -> np.ndarray:
    """Independent materialization by explicit per-term outer products."""
    out = np.zeros(a.grid.dims)
    for i in range(a.rank):
        block = np.array(a.weights[i])
        for mat in a.factors:
            block = np.multiply.outer(block, mat[:, i])
        out += block
    return out


def dense_unfold(values: np.ndarray, mode: int) -> np.ndarray:
    """Mode-`mode` unfolding of a dense array (mode rows vs everything else)."""
    return np.moveaxis(values, mode, 0).reshape(values.shape[mode], -1)


def principal_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of two orthonormal bases.

    Sine-based (Bjorck-Golub) evaluation: the cosine formula cannot
    resolve angles below sqrt(eps).
    """
    s = np.linalg.svd(v - u @ (u.T @ v), compute_uv=False)
    return np.arcsin(np.clip(s, 0.0, 1.0))
