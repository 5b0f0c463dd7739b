"""Randomized trigonometric test functions and the method-comparison harness.

Test functions are finite sine series in CP form,

    F = sum_{k_1..k_d}  a_k * sin(pi k_1 x_1) * ... * sin(pi k_d x_d),

with per-dimension wave-number bounds drawn uniformly from {1..lmax} and
amplitudes ``a_k = alpha_k / (k_1^2 + ... + k_d^2)^(beta/2)`` for alpha
uniform in [-1, 1].  The exponent beta sets the smoothness of the family.
Because the number of multi-indices grows like lmax^d, a uniform
without-replacement subsample of at most ``term_budget`` of them is
retained (recorded in the metadata); this keeps generation feasible at any
order while preserving the spectral decay.

The harness runs every (dimension, function seed, method) cell of a
campaign independently - optionally across processes - and emits one CSV
row per rank, followed by mean/std summaries per (dimension, method, rank).
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import FixedPointConfig
from .core import CpTensor, Grid
from .greedy import GreedyConfig, greedy_decompose
from .io import ParseError

__all__ = [
    "RandomFunctionSpec",
    "ExperimentConfig",
    "beta_for",
    "gen_random_function",
    "run_experiment",
    "write_results_csv",
    "summarize",
    "write_summary_csv",
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
]

RESULT_COLUMNS = ("method", "dim", "beta", "seed", "rank", "rel_residual",
                  "converged", "error_flag")
SUMMARY_COLUMNS = ("dim", "method", "rank", "mean", "std", "n", "excluded")

_METHOD_CODES = {"als": 0, "asvd": 1, "cptt": 2}
_REGULARITY_CODES = {"L2": 0, "H1": 1}


@dataclass(frozen=True)
class RandomFunctionSpec:
    """Recipe for one random sine-series tensor."""

    dim: int
    beta: float
    n_points: int = 25
    lmax: int = 6
    seed: int = 0
    term_budget: int = 200

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.lmax < 1:
            raise ValueError("lmax must be at least 1")
        if self.term_budget < 1:
            raise ValueError("term_budget must be at least 1")
        if self.n_points < 1:
            raise ValueError("n_points must be at least 1")


def beta_for(dim: int, regularity: str) -> float:
    """Smoothness exponent rule: d/2 + 0.1 for L2 families, d/2 + 1.1 for H1."""
    if regularity not in _REGULARITY_CODES:
        raise ValueError(f"regularity must be 'L2' or 'H1', got {regularity!r}")
    return dim / 2 + (0.1 if regularity == "L2" else 1.1)


def _sample_multi_indices(rng, bounds: np.ndarray, count: int) -> np.ndarray:
    """Uniform sample of `count` distinct wave-number tuples, one coordinate
    per dimension in {1..bounds[j]}, returned in lexicographic order.

    When the index set is small it is enumerated outright.  Otherwise
    tuples are drawn with replacement keeping first occurrences, which
    realizes exact without-replacement sampling even when the index count
    is astronomically large.
    """
    total = math.prod(int(b) for b in bounds)
    if total <= count:
        flat = np.arange(total, dtype=np.int64)
        return np.stack(np.unravel_index(flat, tuple(int(b) for b in bounds))).T + 1
    seen: set[tuple] = set()
    out: list[tuple] = []
    while len(out) < count:
        batch = rng.integers(1, bounds + 1, size=(4 * count, bounds.size))
        for row in batch:
            tup = tuple(int(v) for v in row)
            if tup not in seen:
                seen.add(tup)
                out.append(tup)
                if len(out) == count:
                    break
    return np.array(sorted(out), dtype=np.int64)


def gen_random_function(spec: RandomFunctionSpec, with_metadata: bool = False):
    """Generate the CP tensor for `spec`; bit-identical for a fixed seed.

    Mode vectors are the sines sampled on the midpoint grid
    ``x_j = (j + 1/2) / n_points`` (midpoints avoid the zero endpoints of
    the sine family), normalized to unit length with the normalization
    folded into the term weights.

    With ``with_metadata=True`` also returns a dict with the drawn
    wave-number bounds, the total multi-index count and the retained count.
    """
    rng = np.random.default_rng(spec.seed)
    bounds = rng.integers(1, spec.lmax + 1, size=spec.dim)
    total = math.prod(int(b) for b in bounds)
    k = _sample_multi_indices(rng, bounds, spec.term_budget)
    n_terms = k.shape[0]

    alpha = rng.uniform(-1.0, 1.0, size=n_terms)
    weights = alpha / np.sqrt((k * k).sum(axis=1)) ** spec.beta

    x = (np.arange(spec.n_points) + 0.5) / spec.n_points
    factors = tuple(
        np.sin(np.pi * np.outer(x, k[:, j])) for j in range(spec.dim)
    )
    grid = Grid((spec.n_points,) * spec.dim)
    tensor = CpTensor(grid, weights, factors)
    if not with_metadata:
        return tensor
    metadata = {
        "seed": spec.seed,
        "l_values": [int(b) for b in bounds],
        "total_multi_indices": total,
        "retained_terms": n_terms,
    }
    return tensor, metadata


@dataclass(frozen=True)
class ExperimentConfig:
    """A full comparison campaign over dimensions, seeds and methods."""

    dims: tuple[int, ...]
    regularity: str
    methods: tuple[str, ...]
    max_rank: int
    base_seed: int
    n_functions: int = 32
    report_ranks: tuple[int, ...] = (25, 50, 75)
    n_points: int = 25
    lmax: int = 6
    term_budget: int = 200

    def __post_init__(self):
        if not self.dims:
            raise ValueError("dims must be non-empty")
        if self.regularity not in _REGULARITY_CODES:
            raise ValueError(f"regularity must be 'L2' or 'H1', got {self.regularity!r}")
        for m in self.methods:
            if m not in _METHOD_CODES:
                raise ValueError(f"unknown method {m!r}")
        if not self.methods:
            raise ValueError("methods must be non-empty")
        if self.n_functions < 1:
            raise ValueError("n_functions must be at least 1")
        if self.max_rank < 1:
            raise ValueError("max_rank must be at least 1")
        for rank in self.report_ranks:
            if not 1 <= rank <= self.max_rank:
                raise ValueError(
                    f"report rank {rank} outside [1, {self.max_rank}]"
                )


def _derived_seed(parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _run_cell(args):
    """Worker for one (dim, seed index, method) cell; returns CSV rows."""
    cfg, dim, func_index, method = args
    reg = _REGULARITY_CODES[cfg.regularity]
    beta = beta_for(dim, cfg.regularity)
    func_seed = _derived_seed([cfg.base_seed, dim, reg, func_index])
    try:
        spec = RandomFunctionSpec(
            dim=dim, beta=beta, n_points=cfg.n_points, lmax=cfg.lmax,
            seed=func_seed, term_budget=cfg.term_budget,
        )
        tensor = gen_random_function(spec)
        solver_seed = _derived_seed(
            [cfg.base_seed, dim, reg, func_index, _METHOD_CODES[method]]
        )
        gcfg = GreedyConfig(
            method=method,
            target_rank=cfg.max_rank,
            solver_cfg=FixedPointConfig(relaxed=True, rng_seed=solver_seed),
        )
        _, trace = greedy_decompose(tensor, gcfg)
    except Exception:
        return [(method, dim, beta, func_seed, 0, float("nan"), False, 1)]
    rows = []
    rank = 0
    for step in trace.steps:
        rank += len(step.terms)
        if step.terms:
            rows.append(
                (method, dim, beta, func_seed, rank, step.rel_residual,
                 bool(step.converged), 0)
            )
    return rows


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[tuple]:
    """Run every campaign cell and return canonically sorted result rows.

    Cells are pure given their derived seeds, so they may execute in any
    order and in parallel (`workers` > 1 uses separate processes); the
    returned row order is sorted and therefore identical either way.
    """
    cells = [
        (cfg, dim, i, method)
        for dim in cfg.dims
        for i in range(cfg.n_functions)
        for method in cfg.methods
    ]
    if workers > 1:
        # One BLAS thread per worker; spawned children pick the setting up
        # on their fresh numpy import.
        for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, "1")
        import multiprocessing as mp

        with ProcessPoolExecutor(
            max_workers=workers, mp_context=mp.get_context("spawn")
        ) as pool:
            chunks = list(pool.map(_run_cell, cells))
    else:
        chunks = [_run_cell(cell) for cell in cells]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    return rows


def write_results_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for method, dim, beta, seed, rank, rel, conv, err in rows:
            writer.writerow(
                [method, dim, repr(float(beta)), seed, rank, repr(float(rel)),
                 bool(conv), err]
            )


def _parse_results(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("line 1: empty results file") from None
        if tuple(header) != RESULT_COLUMNS:
            raise ParseError(f"line 1: expected header {','.join(RESULT_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RESULT_COLUMNS):
                raise ParseError(
                    f"line {lineno}: expected {len(RESULT_COLUMNS)} fields, got {len(row)}"
                )
            try:
                rows.append(
                    (row[0], int(row[1]), float(row[2]), int(row[3]), int(row[4]),
                     float(row[5]), row[6] == "True", int(row[7]))
                )
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
    return rows


def summarize(results_csv, report_ranks) -> list[tuple]:
    """Mean and sample standard deviation of the relative residual per
    (dim, method, rank) across seeds; error-flagged rows are excluded and
    their count reported.  Returns rows in the summary-CSV column order."""
    rows = _parse_results(results_csv)
    groups: dict[tuple, list[float]] = {}
    errors: dict[tuple, int] = {}
    for method, dim, _beta, _seed, rank, rel, _conv, err in rows:
        if err:
            errors[(dim, method)] = errors.get((dim, method), 0) + 1
        elif rank in report_ranks:
            groups.setdefault((dim, method, rank), []).append(rel)

    out = []
    for (dim, method, rank) in sorted(groups):
        vals = np.array(groups[(dim, method, rank)])
        n = vals.size
        mean = float(vals.mean())
        std = float(vals.std(ddof=1)) if n > 1 else 0.0
        out.append((dim, method, rank, mean, std, n, errors.get((dim, method), 0)))
    return out


def write_summary_csv(rows, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(SUMMARY_COLUMNS)
    for dim, method, rank, mean, std, n, excluded in rows:
        writer.writerow([dim, method, rank, repr(mean), repr(std), n, excluded])
