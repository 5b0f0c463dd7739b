"""Greedy canonical polyadic tensor approximation.

Builds CP (sum of rank-1 terms) approximations of tensors given in CP
form, either by the adaptive sequential-POD method (CP-TT) or by the ALS
and ASVD fixed-point baselines, with exact least-squares re-optimization
of the term coefficients after every greedy step.  Includes a
materialization-free unfolding POD, a random-function benchmark harness,
and a small CLI (``cptt --help``).
"""

from .baselines import (
    FixedPointConfig,
    SolveOutcome,
    als_rank1,
    asvd_rank1,
    mode_contraction,
    pair_contraction,
)
from .bench import (
    ExperimentConfig,
    RandomFunctionSpec,
    beta_for,
    gen_random_function,
    run_experiment,
    summarize,
    write_results_csv,
    write_summary_csv,
)
from .core import (
    CpTensor,
    DenseSizeError,
    DenseTensor,
    Grid,
    GridMismatchError,
    PureTensor,
    TensorValueError,
    axpy,
    contract_mode,
    inner,
    norm,
    to_dense,
)
from .cp_tt import CpttDiagnostics, RankKDiagnostics, cptt_rank1, cptt_rankk
from .greedy import (
    GreedyConfig,
    GreedyStep,
    GreedyTrace,
    greedy_decompose,
    optimize_coefficients,
    write_trace_csv,
)
from .io import ParseError, read_cp, write_cp
from .pod import FiberPod, PodResult, assemble_gram_core, fiber_pod, unfolding_pod

__version__ = "0.1.0"

__all__ = [
    "CpTensor",
    "CpttDiagnostics",
    "DenseSizeError",
    "DenseTensor",
    "ExperimentConfig",
    "FiberPod",
    "FixedPointConfig",
    "Grid",
    "GreedyConfig",
    "GreedyStep",
    "GreedyTrace",
    "GridMismatchError",
    "ParseError",
    "PodResult",
    "PureTensor",
    "RandomFunctionSpec",
    "RankKDiagnostics",
    "SolveOutcome",
    "TensorValueError",
    "als_rank1",
    "assemble_gram_core",
    "asvd_rank1",
    "axpy",
    "beta_for",
    "contract_mode",
    "cptt_rank1",
    "cptt_rankk",
    "fiber_pod",
    "gen_random_function",
    "greedy_decompose",
    "inner",
    "mode_contraction",
    "norm",
    "optimize_coefficients",
    "pair_contraction",
    "read_cp",
    "run_experiment",
    "summarize",
    "to_dense",
    "unfolding_pod",
    "write_cp",
    "write_results_csv",
    "write_summary_csv",
    "write_trace_csv",
]
