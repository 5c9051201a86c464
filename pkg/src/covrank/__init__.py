"""Distance-kernel rank laws and covariance-field recovery on Euclidean
space and the unit sphere, with seeded Monte Carlo experiment drivers."""

from .kernels import (
    Kernel,
    KernelMatrix,
    RankClass,
    UnclassifiedKernelError,
    arccos_taylor_coeffs,
    arccos_taylor_eval,
    parse_kernel,
    theoretical_rank,
)
from .manifold import AntipodalPairError, Euclidean, SampleSet, UnitSphere, rng_stream
from .montecarlo import (
    ExperimentConfig,
    RankLawRow,
    RecoveryTrial,
    SweepRow,
    alpha_recommendation,
    condition_sweep,
    fullrank_probability,
    rank_law_sweep,
    recovery_experiment,
    rows_to_csv,
    rows_to_jsonl,
)
from .numrank import (
    DEFAULT_TOLERANCE,
    LeastSquaresSolution,
    RankReport,
    Tolerance,
    rank_report,
    solve_least_squares,
)
from .tensor import (
    CovField,
    OperatorField,
    RecoveryResult,
    assemble_Y,
    assemble_Z,
    modified_sigma_field,
    outer_field,
    recover,
    sigma_field,
    trace_system,
    unfold_C,
)

__version__ = "0.1.0"

__all__ = [
    "AntipodalPairError",
    "CovField",
    "DEFAULT_TOLERANCE",
    "Euclidean",
    "ExperimentConfig",
    "Kernel",
    "KernelMatrix",
    "LeastSquaresSolution",
    "OperatorField",
    "RankClass",
    "RankLawRow",
    "RankReport",
    "RecoveryResult",
    "RecoveryTrial",
    "SampleSet",
    "SweepRow",
    "Tolerance",
    "UnclassifiedKernelError",
    "UnitSphere",
    "alpha_recommendation",
    "arccos_taylor_coeffs",
    "arccos_taylor_eval",
    "assemble_Y",
    "assemble_Z",
    "condition_sweep",
    "fullrank_probability",
    "modified_sigma_field",
    "outer_field",
    "parse_kernel",
    "rank_law_sweep",
    "rank_report",
    "recover",
    "recovery_experiment",
    "rng_stream",
    "rows_to_csv",
    "rows_to_jsonl",
    "sigma_field",
    "solve_least_squares",
    "theoretical_rank",
    "trace_system",
    "unfold_C",
]
