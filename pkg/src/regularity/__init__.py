"""Greedy regularity decompositions of matrices and graphs."""

from .cutalg import (
    CutAtom,
    CutDecomposition,
    black_square_norm_exact,
    classical_cut_norm,
    cut_norm_exact,
    cut_norm_heuristic,
    realize,
)
from .engine import (
    GrowthFunction,
    RegularityResult,
    f_iterate,
    strong_decompose_cut,
    strong_decompose_rank,
    weak_decompose_cut,
    weak_decompose_rank,
)
from .estimators import RegularityDecomposition, RegularityPartition
from .exceptions import (
    BudgetExceededError,
    ConvergenceError,
    DegenerateDirectionError,
    DimensionError,
    DomainError,
    RegularityError,
    ZeroMatrixError,
)
from .graphreg import (
    Graph,
    Partition,
    common_refinement,
    compress,
    discrepancy_exact,
    estimate_cut,
    verify_exceptional,
    verify_irregularity,
    verify_szemeredi_disc,
    verify_weak_graph,
)
from .matcore import ParseError, f_top_k_norm, frobenius_norm, top_singular_triple

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ConvergenceError",
    "CutAtom",
    "CutDecomposition",
    "DegenerateDirectionError",
    "DimensionError",
    "DomainError",
    "Graph",
    "GrowthFunction",
    "ParseError",
    "Partition",
    "RegularityDecomposition",
    "RegularityError",
    "RegularityPartition",
    "RegularityResult",
    "ZeroMatrixError",
    "black_square_norm_exact",
    "classical_cut_norm",
    "common_refinement",
    "compress",
    "cut_norm_exact",
    "cut_norm_heuristic",
    "discrepancy_exact",
    "estimate_cut",
    "f_iterate",
    "f_top_k_norm",
    "frobenius_norm",
    "realize",
    "strong_decompose_cut",
    "strong_decompose_rank",
    "top_singular_triple",
    "verify_exceptional",
    "verify_irregularity",
    "verify_szemeredi_disc",
    "verify_weak_graph",
    "weak_decompose_cut",
    "weak_decompose_rank",
]
