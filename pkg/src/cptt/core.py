"""Tensor algebra in canonical polyadic (CP) format on uniform grids.

A CP tensor is a weighted sum of rank-1 (pure product) terms,

    T = sum_i  c_i * f_i^(1) (x) f_i^(2) (x) ... (x) f_i^(d),

stored as one weight vector plus one factor matrix per dimension.  All
operations here (inner products, norms, linear combination, mode
contraction) work directly on the factors without ever materializing the
full array; :func:`to_dense` exists only as an oracle for small instances.

Representation convention: every stored factor column has unit Euclidean
norm, with the magnitude carried in the weights.  Inner products use the
unweighted discrete Euclidean inner product on grid values, so all
relative residual norms are independent of any uniform quadrature weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "CpTensor",
    "PureTensor",
    "DenseTensor",
    "GridMismatchError",
    "TensorValueError",
    "DenseSizeError",
    "inner",
    "norm",
    "axpy",
    "contract_mode",
    "to_dense",
]

#: Tolerance under which a stored factor column counts as already unit-norm.
UNIT_NORM_TOL = 1e-12

#: Default element-count cap for dense materialization.
DENSE_CAP = 10_000_000


class GridMismatchError(ValueError):
    """Operands are defined on different grids."""


class TensorValueError(ValueError):
    """Tensor data contains NaN or infinite entries."""


class DenseSizeError(ValueError):
    """Dense materialization would exceed the element-count cap."""


@dataclass(frozen=True)
class Grid:
    """Per-dimension point counts of a uniform grid.

    ``order`` (the number of dimensions) is at least 1; order-1 grids arise
    only as results of contracting an order-2 tensor.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) < 1:
            raise ValueError("grid needs at least one dimension")
        if any(n < 1 for n in dims):
            raise ValueError(f"grid dims must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def drop(self, mode: int) -> "Grid":
        """Grid with dimension `mode` removed."""
        return Grid(self.dims[:mode] + self.dims[mode + 1 :])


def _as_finite_array(x, name: str, ndim: int) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True, order="C")
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TensorValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _normalize_columns(weights: np.ndarray, factors: list[np.ndarray]):
    """Rescale factor columns to unit norm, folding magnitudes into weights.

    Columns already unit within UNIT_NORM_TOL are left untouched so that
    write/read round trips are bit-exact.  A zero column zeroes the term's
    weight and is replaced by the first canonical basis vector.
    """
    weights = weights.copy()
    out = []
    for mat in factors:
        col_norms = np.linalg.norm(mat, axis=0)
        if np.all(np.abs(col_norms - 1.0) <= UNIT_NORM_TOL):
            out.append(mat)
            continue
        mat = mat.copy()
        for i, nu in enumerate(col_norms):
            if abs(nu - 1.0) <= UNIT_NORM_TOL:
                continue
            if nu == 0.0:
                weights[i] = 0.0
                mat[0, i] = 1.0
            else:
                mat[:, i] /= nu
                weights[i] *= nu
        out.append(mat)
    return weights, out


@dataclass(frozen=True, eq=False)
class CpTensor:
    """Weighted sum of rank-1 terms over a grid.

    Parameters
    ----------
    grid : Grid
    weights : (r,) array_like
        Term coefficients.  Rank r = 0 denotes the zero tensor.
    factors : sequence of (N_j, r) array_like
        One matrix per dimension; column i holds the dimension-j fiber of
        term i.  Columns are normalized on construction, with magnitudes
        absorbed into the weights.

    Instances are immutable and safe to share across concurrent tasks.
    """

    grid: Grid
    weights: np.ndarray
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        weights = _as_finite_array(self.weights, "weights", 1)
        if len(self.factors) != self.grid.order:
            raise ValueError(
                f"expected {self.grid.order} factor matrices, got {len(self.factors)}"
            )
        r = weights.shape[0]
        mats = []
        for j, (mat, n) in enumerate(zip(self.factors, self.grid.dims)):
            mat = _as_finite_array(mat, f"factors[{j}]", 2)
            if mat.shape != (n, r):
                raise ValueError(
                    f"factors[{j}] has shape {mat.shape}, expected ({n}, {r})"
                )
            mats.append(mat)
        weights, mats = _normalize_columns(weights, mats)
        weights.setflags(write=False)
        for mat in mats:
            mat.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "factors", tuple(mats))

    @classmethod
    def zero(cls, grid: Grid) -> "CpTensor":
        """The rank-0 (zero) tensor on `grid`."""
        factors = [np.zeros((n, 0)) for n in grid.dims]
        return cls(grid, np.zeros(0), tuple(factors))

    @property
    def rank(self) -> int:
        return self.weights.shape[0]

    @property
    def order(self) -> int:
        return self.grid.order


@dataclass(frozen=True, eq=False)
class PureTensor:
    """A single rank-1 term: scalar weight times one unit vector per dimension."""

    grid: Grid
    weight: float
    modes: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.modes) != self.grid.order:
            raise ValueError(
                f"expected {self.grid.order} mode vectors, got {len(self.modes)}"
            )
        weight = float(self.weight)
        if not math.isfinite(weight):
            raise TensorValueError("weight is not finite")
        vecs = []
        for j, (v, n) in enumerate(zip(self.modes, self.grid.dims)):
            v = _as_finite_array(v, f"modes[{j}]", 1)
            if v.shape != (n,):
                raise ValueError(f"modes[{j}] has length {v.shape[0]}, expected {n}")
            nu = float(np.linalg.norm(v))
            if abs(nu - 1.0) > UNIT_NORM_TOL:
                if nu == 0.0:
                    weight = 0.0
                    v = np.zeros(n)
                    v[0] = 1.0
                    v.setflags(write=False)
                else:
                    v = v / nu
                    weight *= nu
                    v.setflags(write=False)
            vecs.append(v)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "modes", tuple(vecs))

    @classmethod
    def zero(cls, grid: Grid) -> "PureTensor":
        """Zero-weight term with canonical unit modes."""
        modes = []
        for n in grid.dims:
            v = np.zeros(n)
            v[0] = 1.0
            modes.append(v)
        return cls(grid, 0.0, tuple(modes))

    def as_cp(self) -> CpTensor:
        """This term as a rank-1 CP tensor."""
        factors = tuple(v[:, None] for v in self.modes)
        return CpTensor(self.grid, np.array([self.weight]), factors)


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Full multidimensional array; test oracle for small instances only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _as_finite_array(self.values, "values", self.grid.order)
        if values.shape != self.grid.dims:
            raise ValueError(
                f"values shape {values.shape} does not match grid {self.grid.dims}"
            )
        object.__setattr__(self, "values", values)


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid.dims} vs {b.grid.dims}")


def inner(a: CpTensor, b: CpTensor) -> float:
    """Discrete L2 inner product of two CP tensors.

    Evaluates ``sum_{i,j} c_i d_j prod_k <f_i^(k), g_j^(k)>`` from the
    per-dimension factor Gram matrices; cost O(r_a r_b sum_k N_k).  The
    final reduction uses exact (order-independent) summation so that
    inner(a, b) == inner(b, a) bitwise.
    """
    _require_same_grid(a, b)
    if a.rank == 0 or b.rank == 0:
        return 0.0
    g = a.factors[0].T @ b.factors[0]
    for fa, fb in zip(a.factors[1:], b.factors[1:]):
        g = g * (fa.T @ fb)
    w = (a.weights[:, None] * b.weights[None, :]) * g
    return math.fsum(w.ravel().tolist())


def norm(a: CpTensor) -> float:
    """Discrete L2 norm; tiny negative round-off under the sqrt is clamped."""
    return math.sqrt(max(inner(a, a), 0.0))


def axpy(alpha: float, x: CpTensor, y: CpTensor) -> CpTensor:
    """Return ``alpha * x + y`` as a CP tensor of rank ``x.rank + y.rank``.

    Terms are concatenated exactly; no recompression ever happens, so
    residuals built this way are exact in CP form.
    """
    _require_same_grid(x, y)
    weights = np.concatenate([float(alpha) * x.weights, y.weights])
    factors = tuple(
        np.concatenate([fx, fy], axis=1) for fx, fy in zip(x.factors, y.factors)
    )
    return CpTensor(x.grid, weights, factors)


def contract_mode(a: CpTensor, mode: int, u: np.ndarray) -> CpTensor:
    """Integrate dimension `mode` of `a` against the vector `u`.

    The result is an order-(d-1) CP tensor whose i-th weight is
    ``c_i * <f_i^(mode), u>`` with all remaining factors unchanged.
    Contracting an order-2 tensor is permitted and yields an order-1
    tensor (a weighted vector in CP form).
    """
    if not 0 <= mode < a.order:
        raise ValueError(f"mode {mode} out of range for order-{a.order} tensor")
    if a.order < 2:
        raise ValueError("cannot contract an order-1 tensor")
    u = np.asarray(u, dtype=float)
    if u.shape != (a.grid.dims[mode],):
        raise ValueError(
            f"contraction vector has length {u.shape}, expected ({a.grid.dims[mode]},)"
        )
    weights = a.weights * (a.factors[mode].T @ u)
    factors = a.factors[:mode] + a.factors[mode + 1 :]
    return CpTensor(a.grid.drop(mode), weights, factors)


def to_dense(a: CpTensor, cap: int = DENSE_CAP) -> DenseTensor:
    """Materialize `a` elementwise; refuses instances larger than `cap`."""
    if a.grid.size > cap:
        raise DenseSizeError(f"dense size {a.grid.size} exceeds cap {cap}")
    values = np.zeros(a.grid.dims)
    for i in range(a.rank):
        term = a.weights[i]
        block = a.factors[0][:, i]
        for mat in a.factors[1:]:
            block = np.multiply.outer(block, mat[:, i])
        values += term * block
    return DenseTensor(a.grid, values)
