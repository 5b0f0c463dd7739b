"""Leading singular triplets of CP tensor unfoldings, without materialization.

The i-th unfolding M_i of a CP tensor groups dimension i against all the
others.  Its left singular vectors and singular values are recovered from
small dense eigenproblems built out of per-dimension factor Gram matrices:

* direct path (N_i <= r): assemble the N_i x N_i correlation kernel
  ``K = F_i H F_i^T`` with ``H = (c c^T) * prod_{k != i} F_k^T F_k`` taken
  elementwise, and eigendecompose it;
* fiber path (N_i > r): orthogonalize the dimension-i fibers first
  (:func:`fiber_pod`), push H through the fiber coefficients
  (:func:`assemble_gram_core`) and eigendecompose the resulting s x s core,
  mapping eigenvectors back through the fiber basis.

Both paths return the same triplets up to round-off and column sign; output
columns are deterministically sign-fixed (largest-magnitude entry positive).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CpTensor

__all__ = ["PodResult", "FiberPod", "fiber_pod", "assemble_gram_core", "unfolding_pod"]

#: Relative singular-value threshold below which fiber directions are dropped.
FIBER_TRUNCATION = 1e-14


@dataclass(frozen=True, eq=False)
class PodResult:
    """Leading left singular triplets of one unfolding.

    ``singular_values`` is non-increasing with non-negative entries (tiny
    negative eigenvalues from round-off are clamped to zero); the columns
    of ``left_modes`` are orthonormal.
    """

    mode: int
    singular_values: np.ndarray
    left_modes: np.ndarray

    @property
    def k(self) -> int:
        return self.singular_values.shape[0]


@dataclass(frozen=True, eq=False)
class FiberPod:
    """Orthogonal factorization of a fiber family: fibers == basis @ coeffs.T."""

    basis: np.ndarray
    coeffs: np.ndarray

    @property
    def s(self) -> int:
        """Numerical rank of the fiber family."""
        return self.basis.shape[1]


def _fix_column_signs(modes: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    if modes.shape[1] == 0:
        return modes
    idx = np.argmax(np.abs(modes), axis=0)
    signs = np.sign(modes[idx, np.arange(modes.shape[1])])
    signs[signs == 0] = 1.0
    return modes * signs


def fiber_pod(factor_matrix: np.ndarray, truncation: float = FIBER_TRUNCATION) -> FiberPod:
    """Thin orthogonal factorization of the columns of `factor_matrix`.

    Each fiber (column) i satisfies ``fiber_i == sum_m coeffs[i, m] * basis[:, m]``
    with orthonormal basis columns.  Directions whose singular value falls
    below ``truncation`` relative to the largest are dropped; an all-zero
    input yields s == 0.
    """
    factor_matrix = np.asarray(factor_matrix, dtype=float)
    u, sv, vt = np.linalg.svd(factor_matrix, full_matrices=False)
    if sv.size == 0 or sv[0] <= 0.0:
        s = 0
    else:
        s = int(np.count_nonzero(sv > truncation * sv[0]))
    return FiberPod(basis=u[:, :s], coeffs=vt[:s].T * sv[:s])


def assemble_gram_core(
    fp: FiberPod, weights: np.ndarray, other_factor_grams
) -> np.ndarray:
    """Project the weighted cross-Gram structure onto the fiber basis.

    Builds the s x s matrix ``A = C^T H C`` with ``C = fp.coeffs`` and
    ``H = (w w^T) * prod_k G_k`` elementwise over the Gram matrices of the
    non-unfolded dimensions.  A is positive semidefinite analytically;
    it is symmetrized on output to kill round-off asymmetry.
    """
    weights = np.asarray(weights, dtype=float)
    r = fp.coeffs.shape[0]
    if weights.shape != (r,):
        raise ValueError(f"weights shape {weights.shape}, expected ({r},)")
    h = np.outer(weights, weights)
    for g in other_factor_grams:
        g = np.asarray(g, dtype=float)
        if g.shape != (r, r):
            raise ValueError(f"factor Gram has shape {g.shape}, expected ({r}, {r})")
        h = h * g
    a = fp.coeffs.T @ h @ fp.coeffs
    return (a + a.T) / 2.0


def _weighted_hadamard(a: CpTensor, mode: int) -> np.ndarray:
    """(c c^T) * prod_{k != mode} F_k^T F_k, taken elementwise."""
    h = np.outer(a.weights, a.weights)
    for k, mat in enumerate(a.factors):
        if k != mode:
            h = h * (mat.T @ mat)
    return h


def _top_triplets_from_eigh(sym: np.ndarray, k: int):
    """Top-k (sigma, vector) pairs of a symmetric PSD matrix, clamped at zero."""
    lam, vec = np.linalg.eigh(sym)
    lam = lam[::-1][:k]
    vec = vec[:, ::-1][:, :k]
    return np.sqrt(np.clip(lam, 0.0, None)), vec


def _pod_core(factor: np.ndarray, h: np.ndarray, mode: int, k: int, path: str) -> PodResult:
    """Shared unfolding-POD kernel given the weighted Hadamard product `h`."""
    n, r = factor.shape
    if path == "auto":
        path = "direct" if n <= r else "fiber"
    if path == "direct":
        kernel = factor @ h @ factor.T
        kernel = (kernel + kernel.T) / 2.0
        sigmas, modes = _top_triplets_from_eigh(kernel, k)
    elif path == "fiber":
        u, sv, vt = np.linalg.svd(factor, full_matrices=False)
        if sv.size == 0 or sv[0] <= 0.0:
            s = 0
        else:
            s = int(np.count_nonzero(sv > FIBER_TRUNCATION * sv[0]))
        fp = FiberPod(basis=u[:, :s], coeffs=vt[:s].T * sv[:s])
        core = fp.coeffs.T @ h @ fp.coeffs
        core = (core + core.T) / 2.0
        sigmas, core_vecs = _top_triplets_from_eigh(core, min(k, s))
        modes = fp.basis @ core_vecs
        if s < k:
            # Rank-deficient fiber family: pad with orthonormal directions
            # (discarded left singular vectors) carrying zero singular values.
            pad = k - s
            modes = np.concatenate([modes, u[:, s : s + pad]], axis=1)
            sigmas = np.concatenate([sigmas, np.zeros(pad)])
    else:
        raise ValueError(f"unknown path {path!r}, expected 'auto', 'direct' or 'fiber'")
    return PodResult(mode=mode, singular_values=sigmas, left_modes=_fix_column_signs(modes))


def unfolding_pod(a: CpTensor, mode: int, k: int, path: str = "auto") -> PodResult:
    """Leading k left singular triplets of the mode-th unfolding of `a`.

    Path selection follows the cost crossover between the two assembly
    strategies: the N x N correlation kernel when ``N_mode <= r``, the
    fiber factorization otherwise.  `path` may force either one (used by
    the path-equivalence tests).

    A rank-0 input yields the defined-empty result (no triplets);
    otherwise k must satisfy ``1 <= k <= min(N_mode, r)``.
    """
    if not 0 <= mode < a.order:
        raise ValueError(f"mode {mode} out of range for order-{a.order} tensor")
    n = a.grid.dims[mode]
    if a.rank == 0:
        return PodResult(mode=mode, singular_values=np.zeros(0), left_modes=np.zeros((n, 0)))
    if not 1 <= k <= min(n, a.rank):
        raise ValueError(f"k={k} out of range [1, {min(n, a.rank)}] for mode {mode}")
    h = _weighted_hadamard(a, mode)
    return _pod_core(a.factors[mode], h, mode, k, path)
