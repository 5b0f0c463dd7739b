"""Greedy rank-1 (and rank-k) tensor terms via adaptive sequential POD.

One rank-1 term is extracted from a CP tensor by repeatedly (a) computing
the unfolding POD of every remaining dimension, (b) keeping the dimension
with the largest leading singular value, and (c) contracting the tensor
against that dimension's leading mode.  When two dimensions remain, the
dense 2-D SVD closes the recursion.  The dimension ordering is therefore
decided adaptively by the data, not fixed in advance.

The rank-k variant replaces the first selection criterion by the summed
energy of the k leading singular values, then runs the rank-1 iteration
independently on each of the k contracted branches; because the k first-
dimension modes are orthonormal, the resulting terms are mutually
orthogonal, which is what makes the k-term update stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CpTensor, PureTensor, contract_mode
from .pod import _pod_core

__all__ = ["CpttDiagnostics", "RankKDiagnostics", "cptt_rank1", "cptt_rankk"]


@dataclass(frozen=True)
class CpttDiagnostics:
    """Per-step record of one rank-1 extraction.

    ``order`` is the dimension permutation chosen by the iteration (0-based
    original dimension indices).  ``top_sigmas`` holds the winning leading
    singular value of steps 1..d-1; ``residual_g_norms`` the norm of the
    part split off at each step, computed through the spectral identity
    ``||G||^2 = sum_{j>1} sigma_j^2`` rather than by forming G.
    ``predicted_residual_sq`` accumulates them and equals ``||f - t||^2``
    up to round-off.
    """

    order: tuple[int, ...]
    top_sigmas: tuple[float, ...]
    residual_g_norms: tuple[float, ...]
    predicted_residual_sq: float


@dataclass(frozen=True)
class RankKDiagnostics:
    """Record of a rank-k extraction: the common first split plus one
    rank-1 diagnostics block per branch (dimension labels re-expressed in
    the coordinates of the original tensor)."""

    split_mode: int
    split_sigmas: tuple[float, ...]
    branches: tuple[CpttDiagnostics, ...]


def _hadamard_chain(weights: np.ndarray, mats: list[np.ndarray]):
    """Prefix/suffix elementwise products so that leaving out one Gram
    matrix costs O(r^2) instead of O(d r^2)."""
    w2 = np.outer(weights, weights)
    pref = [w2]
    for m in mats:
        pref.append(pref[-1] * m)
    suf = [np.ones_like(w2)]
    for m in reversed(mats):
        suf.append(suf[-1] * m)
    suf.reverse()
    return pref, suf


def _closure_svd(factor_a, factor_b, weights):
    """Best rank-1 triplet and spectral tail of an order-2 CP tensor."""
    matrix = (factor_a * weights) @ factor_b.T
    u, sv, vt = np.linalg.svd(matrix, full_matrices=False)
    ua = u[:, 0]
    vb = vt[0]
    i = int(np.argmax(np.abs(ua)))
    if ua[i] < 0:
        ua = -ua
        vb = -vb
    tail = sv[1:]
    return float(sv[0]), ua, vb, float(np.dot(tail, tail))


def cptt_rank1(f: CpTensor) -> tuple[PureTensor, CpttDiagnostics]:
    """Extract one rank-1 term from `f` by adaptive sequential POD.

    Returns the term ``t = sigma * u^(1) (x) ... (x) u^(d)`` (modes in
    original dimension order, non-negative weight) together with the
    per-step diagnostics.  A rank-0 input yields the zero term with empty
    diagnostics.  Ties in the singular-value selection break toward the
    lowest dimension index.
    """
    if f.order < 2:
        raise ValueError("rank-1 extraction needs an order >= 2 tensor")
    if f.rank == 0:
        return PureTensor.zero(f.grid), CpttDiagnostics((), (), (), 0.0)

    weights = f.weights
    grams = [mat.T @ mat for mat in f.factors]
    active = list(range(f.order))
    chosen: dict[int, np.ndarray] = {}
    order: list[int] = []
    tops: list[float] = []
    g_sq: list[float] = []

    while len(active) > 2:
        mats = [grams[dim] for dim in active]
        pref, suf = _hadamard_chain(weights, mats)
        best = None
        for t, dim in enumerate(active):
            h = pref[t] * suf[t + 1]
            k_full = min(f.grid.dims[dim], f.rank)
            pod = _pod_core(f.factors[dim], h, dim, k_full, "auto")
            sigma1 = float(pod.singular_values[0])
            if best is None or sigma1 > best[0]:
                best = (sigma1, dim, pod)
        sigma1, dim, pod = best
        u = pod.left_modes[:, 0]
        tail = pod.singular_values[1:]
        order.append(dim)
        tops.append(sigma1)
        g_sq.append(float(np.dot(tail, tail)))
        chosen[dim] = u
        weights = weights * (f.factors[dim].T @ u)
        active.remove(dim)

    dim_a, dim_b = active
    sigma, ua, vb, tail_sq = _closure_svd(f.factors[dim_a], f.factors[dim_b], weights)
    chosen[dim_a] = ua
    chosen[dim_b] = vb
    order.extend([dim_a, dim_b])
    tops.append(sigma)
    g_sq.append(tail_sq)

    term = PureTensor(f.grid, sigma, tuple(chosen[j] for j in range(f.order)))
    diag = CpttDiagnostics(
        order=tuple(order),
        top_sigmas=tuple(tops),
        residual_g_norms=tuple(math.sqrt(v) for v in g_sq),
        predicted_residual_sq=math.fsum(g_sq),
    )
    return term, diag


def _collapse_order1(branch: CpTensor) -> tuple[float, np.ndarray]:
    """An order-1 CP tensor is just a weighted vector; return (norm, unit).

    The weight stays non-negative; the vector keeps its natural sign.
    """
    v = branch.factors[0] @ branch.weights
    w = float(np.linalg.norm(v))
    if w == 0.0:
        unit = np.zeros(branch.grid.dims[0])
        unit[0] = 1.0
    else:
        unit = v / w
    return w, unit


def cptt_rankk(f: CpTensor, k: int) -> tuple[list[PureTensor], RankKDiagnostics]:
    """Extract k mutually orthogonal rank-1 terms in one pass.

    The first split keeps the dimension maximizing the summed squared
    energy of its k leading singular values; its k orthonormal modes spawn
    k independent contracted branches, each closed by :func:`cptt_rank1`.
    With k == 1 this reduces exactly to a single rank-1 extraction.
    """
    if f.order < 2:
        raise ValueError("rank-k extraction needs an order >= 2 tensor")
    if f.rank == 0:
        raise ValueError("rank-k extraction needs a nonzero (rank >= 1) input")
    k_max = min(min(n, f.rank) for n in f.grid.dims)
    if not 1 <= k <= k_max:
        raise ValueError(f"k={k} out of range [1, {k_max}]")

    grams = [mat.T @ mat for mat in f.factors]
    pref, suf = _hadamard_chain(f.weights, grams)
    best = None
    for dim in range(f.order):
        h = pref[dim] * suf[dim + 1]
        k_full = min(f.grid.dims[dim], f.rank)
        pod = _pod_core(f.factors[dim], h, dim, k_full, "auto")
        energy = float(np.dot(pod.singular_values[:k], pod.singular_values[:k]))
        if best is None or energy > best[0]:
            best = (energy, dim, pod)
    _, split_mode, pod = best
    split_modes = pod.left_modes[:, :k]
    other_dims = [d for d in range(f.order) if d != split_mode]

    terms: list[PureTensor] = []
    branch_diags: list[CpttDiagnostics] = []
    for j in range(k):
        u_j = split_modes[:, j]
        branch = contract_mode(f, split_mode, u_j)
        if branch.order == 1:
            w, unit = _collapse_order1(branch)
            branch_modes = {other_dims[0]: unit}
            diag = CpttDiagnostics(
                order=(other_dims[0],),
                top_sigmas=(w,),
                residual_g_norms=(),
                predicted_residual_sq=0.0,
            )
            weight = w
        else:
            t_branch, d_branch = cptt_rank1(branch)
            branch_modes = {
                other_dims[t]: t_branch.modes[t] for t in range(branch.order)
            }
            diag = CpttDiagnostics(
                order=tuple(other_dims[t] for t in d_branch.order),
                top_sigmas=d_branch.top_sigmas,
                residual_g_norms=d_branch.residual_g_norms,
                predicted_residual_sq=d_branch.predicted_residual_sq,
            )
            weight = t_branch.weight
        modes = []
        for dim in range(f.order):
            modes.append(u_j if dim == split_mode else branch_modes[dim])
        terms.append(PureTensor(f.grid, weight, tuple(modes)))
        branch_diags.append(diag)

    diag = RankKDiagnostics(
        split_mode=split_mode,
        split_sigmas=tuple(float(s) for s in pod.singular_values[:k]),
        branches=tuple(branch_diags),
    )
    return terms, diag
