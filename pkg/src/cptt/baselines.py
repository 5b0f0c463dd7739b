"""Fixed-point rank-1 solvers on CP-format residuals: ALS and ASVD.

Both solvers look for the best rank-1 term of a CP tensor by block
coordinate updates from a random start, stopping once the distance between
successive rank-1 iterates drops below a tolerance or an iteration cap is
hit.  ALS updates one dimension at a time in closed form; ASVD updates
pairs of dimensions through the leading singular triplet of a two-
dimensional contraction.  Everything is evaluated on the CP factors
directly, never on the materialized tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import CpTensor, PureTensor

__all__ = [
    "FixedPointConfig",
    "SolveOutcome",
    "als_rank1",
    "asvd_rank1",
    "mode_contraction",
    "pair_contraction",
]


@dataclass(frozen=True)
class FixedPointConfig:
    """Stopping rule and seeding for the fixed-point solvers.

    ``relaxed`` applies to ALS only: after every full sweep the term
    weight is reset to its optimal least-squares value before the
    convergence distance is evaluated.
    """

    tol: float = 1e-4
    max_iters: int = 100
    relaxed: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class SolveOutcome:
    """Result of one fixed-point solve: the rank-1 term in canonical form
    (unit modes, magnitude in the weight), the number of sweeps used, and
    the last successive-iterate distance."""

    term: PureTensor
    iterations: int
    converged: bool
    final_eta: float


def _random_unit_modes(grid_dims, rng) -> list[np.ndarray]:
    modes = []
    for n in grid_dims:
        v = rng.standard_normal(n)
        modes.append(v / np.linalg.norm(v))
    return modes


def _mode_dot_table(f: CpTensor, modes) -> np.ndarray:
    """D[k, i] = <f_i^(k), u^(k)> for the current unit factors u."""
    return np.stack([mat.T @ u for mat, u in zip(f.factors, modes)])


def _coef_excluding(f: CpTensor, dots: np.ndarray, skip) -> np.ndarray:
    keep = [k for k in range(f.order) if k not in skip]
    return f.weights * np.prod(dots[keep], axis=0)


def mode_contraction(f: CpTensor, mode: int, modes) -> np.ndarray:
    """Contract `f` against the unit vectors `modes` in every dimension
    except `mode`; the result is the closed-form ALS block update."""
    dots = _mode_dot_table(f, modes)
    return f.factors[mode] @ _coef_excluding(f, dots, {mode})


def pair_contraction(f: CpTensor, i: int, j: int, modes) -> np.ndarray:
    """Contract `f` against `modes` in every dimension except `i` and `j`,
    yielding the N_i x N_j matrix whose best rank-1 part drives ASVD."""
    dots = _mode_dot_table(f, modes)
    coef = _coef_excluding(f, dots, {i, j})
    return (f.factors[i] * coef) @ f.factors[j].T


def _eta(w, modes, w_prev, modes_prev) -> float:
    """Distance between successive rank-1 iterates via their rank-2 Gram."""
    cross = w * w_prev
    for u, v in zip(modes, modes_prev):
        cross *= float(np.dot(u, v))
    return math.sqrt(max(w * w + w_prev * w_prev - 2.0 * cross, 0.0))


def als_rank1(f: CpTensor, cfg: FixedPointConfig) -> SolveOutcome:
    """Alternating least squares for the best rank-1 term of `f`.

    Sweeps the dimensions in order, replacing each factor by the exact
    one-dimensional least-squares minimizer (the contraction of `f`
    against all other current factors), with the magnitude carried in the
    term weight.  A block whose contraction vanishes is reinitialized
    randomly and the sweep continues.
    """
    if f.order < 2:
        raise ValueError("rank-1 solve needs an order >= 2 tensor")
    if f.rank == 0:
        return SolveOutcome(PureTensor.zero(f.grid), 0, True, 0.0)

    rng = np.random.default_rng(cfg.rng_seed)
    modes = _random_unit_modes(f.grid.dims, rng)
    dots = _mode_dot_table(f, modes)
    w = 1.0
    converged = False
    eta = math.inf
    iters = 0
    for _ in range(cfg.max_iters):
        iters += 1
        w_prev = w
        modes_prev = [u.copy() for u in modes]
        for i in range(f.order):
            v = f.factors[i] @ _coef_excluding(f, dots, {i})
            nv = float(np.linalg.norm(v))
            if nv == 0.0:
                modes[i] = _random_unit_modes(f.grid.dims[i : i + 1], rng)[0]
                w = 0.0
            else:
                modes[i] = v / nv
                w = nv
            dots[i] = f.factors[i].T @ modes[i]
        if cfg.relaxed:
            w = float(np.dot(f.weights, np.prod(dots, axis=0)))
        eta = _eta(w, modes, w_prev, modes_prev)
        if eta < cfg.tol:
            converged = True
            break
    term = PureTensor(f.grid, w, tuple(modes))
    return SolveOutcome(term, iters, converged, eta)


def asvd_rank1(f: CpTensor, cfg: FixedPointConfig) -> SolveOutcome:
    """Alternating SVD over all dimension pairs in lexicographic order.

    Each pair update contracts `f` against the other current factors,
    takes the leading singular triplet of the resulting matrix as the new
    pair of factors, and carries the singular value as the term weight.
    The convergence test is identical to ALS.
    """
    if f.order < 2:
        raise ValueError("rank-1 solve needs an order >= 2 tensor")
    if f.rank == 0:
        return SolveOutcome(PureTensor.zero(f.grid), 0, True, 0.0)

    pairs = list(combinations(range(f.order), 2))
    rng = np.random.default_rng(cfg.rng_seed)
    modes = _random_unit_modes(f.grid.dims, rng)
    dots = _mode_dot_table(f, modes)
    w = 1.0
    converged = False
    eta = math.inf
    iters = 0
    for _ in range(cfg.max_iters):
        iters += 1
        w_prev = w
        modes_prev = [u.copy() for u in modes]
        for i, j in pairs:
            coef = _coef_excluding(f, dots, {i, j})
            matrix = (f.factors[i] * coef) @ f.factors[j].T
            u, sv, vt = np.linalg.svd(matrix, full_matrices=False)
            if sv[0] == 0.0:
                modes[i] = _random_unit_modes(f.grid.dims[i : i + 1], rng)[0]
                modes[j] = _random_unit_modes(f.grid.dims[j : j + 1], rng)[0]
                w = 0.0
            else:
                modes[i] = u[:, 0]
                modes[j] = vt[0]
                w = float(sv[0])
            dots[i] = f.factors[i].T @ modes[i]
            dots[j] = f.factors[j].T @ modes[j]
        eta = _eta(w, modes, w_prev, modes_prev)
        if eta < cfg.tol:
            converged = True
            break
    term = PureTensor(f.grid, w, tuple(modes))
    return SolveOutcome(term, iters, converged, eta)
