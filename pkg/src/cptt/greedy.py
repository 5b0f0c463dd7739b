"""Outer greedy loop: repeated rank-1 (or rank-k) updates with exact
least-squares re-optimization of all accumulated coefficients.

Each iteration runs the configured solver (ALS, ASVD or CP-TT) on the
exact CP-form residual ``f - T``, appends the new term(s), re-solves the
small symmetric system for the best linear combination of *all* terms so
far, and records the relative residual.  The residual is carried exactly
as a CP tensor (term concatenation, no recompression), so every inner
solve sees the true residual.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import FixedPointConfig, als_rank1, asvd_rank1
from .core import CpTensor, PureTensor, inner, norm, to_dense
from .cp_tt import cptt_rank1, cptt_rankk

__all__ = [
    "GreedyConfig",
    "GreedyStep",
    "GreedyTrace",
    "optimize_coefficients",
    "greedy_decompose",
    "write_trace_csv",
]

METHODS = ("als", "asvd", "cptt")

#: Below this grid size the per-iteration residual norm is evaluated on the
#: materialized tensors, which resolves residuals all the way down to
#: machine precision; the factored Gram evaluation used above it bottoms
#: out near sqrt(eps) relative.
DENSE_RESIDUAL_CAP = 10_000


@dataclass(frozen=True)
class GreedyConfig:
    """Settings for one greedy decomposition run.

    ``target_rank`` caps the number of pure terms; ``rel_tol`` stops the
    loop early once the relative residual falls below it.  ``rank_k_update``
    (> 1 only with method "cptt") adds that many orthogonal terms per
    iteration.  ``regularization`` is the relative eigenvalue clip applied
    when solving the coefficient system.
    """

    method: str
    target_rank: int
    rel_tol: float = 0.0
    rank_k_update: int = 1
    solver_cfg: FixedPointConfig = field(default_factory=FixedPointConfig)
    regularization: float = 1e-12
    dense_residual_cap: int = DENSE_RESIDUAL_CAP

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.target_rank < 1:
            raise ValueError("target_rank must be at least 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")
        if self.rank_k_update < 1:
            raise ValueError("rank_k_update must be at least 1")
        if self.rank_k_update > 1 and self.method != "cptt":
            raise ValueError("rank_k_update > 1 requires method 'cptt'")
        if self.rank_k_update > self.target_rank:
            raise ValueError("rank_k_update cannot exceed target_rank")


@dataclass(frozen=True)
class GreedyStep:
    """One iteration of the outer loop (may add several terms).

    ``terms`` holds the pure term(s) contributed by this iteration;
    ``coefficients`` the re-optimized multipliers of *all* terms collected
    so far, in insertion order.
    """

    iteration: int
    terms: tuple[PureTensor, ...]
    coefficients: tuple[float, ...]
    rel_residual: float
    converged: bool
    solver_iterations: int
    order: tuple[int, ...] | None
    note: str = ""


@dataclass(frozen=True)
class GreedyTrace:
    method: str
    input_norm: float
    steps: tuple[GreedyStep, ...]


def optimize_coefficients(
    terms: list[PureTensor], f: CpTensor, regularization: float = 1e-12
) -> np.ndarray:
    """Best linear combination of `terms` approximating `f`.

    Solves the normal equations ``A c = b`` with ``A_lj = <t_j, t_l>`` and
    ``b_l = <f, t_l>`` by eigendecomposition, discarding eigenvalue
    directions below ``regularization`` times the largest; near-duplicate
    greedy terms therefore resolve to the minimum-norm solution instead of
    blowing up.
    """
    if not terms:
        raise ValueError("need at least one term")
    for t in terms:
        if t.grid != f.grid:
            raise ValueError("term grid does not match target grid")
    w = np.array([t.weight for t in terms])
    stacked = [
        np.stack([t.modes[k] for t in terms], axis=1) for k in range(f.grid.order)
    ]
    a = np.outer(w, w)
    for mat in stacked:
        a = a * (mat.T @ mat)
    a = (a + a.T) / 2.0

    if f.rank == 0:
        b = np.zeros(len(terms))
    else:
        cross = np.ones((f.rank, len(terms)))
        for fk, tk in zip(f.factors, stacked):
            cross = cross * (fk.T @ tk)
        b = w * (f.weights @ cross)

    lam, vec = np.linalg.eigh(a)
    lam_max = lam[-1]
    if lam_max <= 0.0:
        return np.zeros(len(terms))
    keep = lam > regularization * lam_max
    vk = vec[:, keep]
    return vk @ ((vk.T @ b) / lam[keep])


def _expansion(grid, terms: list[PureTensor], coeffs: np.ndarray) -> CpTensor:
    """CP tensor sum_l coeffs[l] * terms[l]."""
    weights = coeffs * np.array([t.weight for t in terms])
    factors = tuple(
        np.stack([t.modes[k] for t in terms], axis=1) for k in range(grid.order)
    )
    return CpTensor(grid, weights, factors)


def _residual_cp(f: CpTensor, approx: CpTensor) -> CpTensor:
    weights = np.concatenate([f.weights, -approx.weights])
    factors = tuple(
        np.concatenate([fa, ta], axis=1) for fa, ta in zip(f.factors, approx.factors)
    )
    return CpTensor(f.grid, weights, factors)


def _solver_seed(base: int, iteration: int) -> int:
    """Stable per-iteration reseeding for the fixed-point solvers."""
    return int(np.random.SeedSequence([base, iteration]).generate_state(1)[0])


def greedy_decompose(f: CpTensor, cfg: GreedyConfig) -> tuple[CpTensor, GreedyTrace]:
    """Greedy CP approximation of `f` with per-iteration coefficient reopt.

    Starting from the zero tensor, each iteration computes new term(s) on
    the exact residual, re-optimizes the coefficients of every accumulated
    term, and logs the relative residual.  The loop stops at
    ``target_rank`` terms, when the relative residual reaches ``rel_tol``,
    or early if the solver returns a numerically zero term.  Nonconverged
    inner solves are recorded but their terms are still used.
    """
    if f.rank < 1:
        raise ValueError("input tensor must have rank >= 1")
    norm_f = norm(f)
    denom = norm_f if norm_f > 0 else 1.0
    dense_f = None
    if f.grid.size <= cfg.dense_residual_cap:
        dense_f = to_dense(f).values

    terms: list[PureTensor] = []
    coeffs = np.zeros(0)
    steps: list[GreedyStep] = []
    residual = f
    rel_res = 1.0
    iteration = 0
    while len(terms) + cfg.rank_k_update <= cfg.target_rank:
        iteration += 1
        order = None
        if cfg.method == "cptt":
            if cfg.rank_k_update == 1:
                term, diag = cptt_rank1(residual)
                new_terms = [term]
                order = diag.order
            else:
                new_terms, diag_k = cptt_rankk(residual, cfg.rank_k_update)
                order = (diag_k.split_mode,)
            converged, solver_iters = True, 0
        else:
            solver = als_rank1 if cfg.method == "als" else asvd_rank1
            seeded = replace(
                cfg.solver_cfg,
                rng_seed=_solver_seed(cfg.solver_cfg.rng_seed, iteration),
            )
            outcome = solver(residual, seeded)
            new_terms = [outcome.term]
            converged, solver_iters = outcome.converged, outcome.iterations

        if all(abs(t.weight) <= 1e-14 * norm_f for t in new_terms):
            steps.append(
                GreedyStep(
                    iteration=iteration,
                    terms=(),
                    coefficients=tuple(coeffs),
                    rel_residual=rel_res,
                    converged=converged,
                    solver_iterations=solver_iters,
                    order=order,
                    note="zero_term",
                )
            )
            break

        terms.extend(new_terms)
        coeffs = optimize_coefficients(terms, f, cfg.regularization)
        approx = _expansion(f.grid, terms, coeffs)
        residual = _residual_cp(f, approx)
        if dense_f is not None:
            diff = dense_f - to_dense(approx).values
            rel_res = float(np.linalg.norm(diff)) / denom
        else:
            rel_res = math.sqrt(max(inner(residual, residual), 0.0)) / denom
        steps.append(
            GreedyStep(
                iteration=iteration,
                terms=tuple(new_terms),
                coefficients=tuple(float(c) for c in coeffs),
                rel_residual=rel_res,
                converged=converged,
                solver_iterations=solver_iters,
                order=order,
            )
        )
        if rel_res <= cfg.rel_tol:
            break

    approx = _expansion(f.grid, terms, coeffs) if terms else CpTensor.zero(f.grid)
    trace = GreedyTrace(method=cfg.method, input_norm=norm_f, steps=tuple(steps))
    return approx, trace


def write_trace_csv(trace: GreedyTrace, path) -> None:
    """Write the per-iteration trace with columns
    iter,method,rank,rel_residual,converged,order (order is the dash-joined
    dimension permutation for CP-TT steps, empty for the baselines)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "method", "rank", "rel_residual", "converged", "order"])
        rank = 0
        for step in trace.steps:
            rank += len(step.terms)
            order = "-".join(str(i) for i in step.order) if step.order else ""
            writer.writerow(
                [step.iteration, trace.method, rank, repr(step.rel_residual),
                 step.converged, order]
            )
