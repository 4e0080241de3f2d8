"""Recovery of low-rank Gaussian data under random coordinate corruptions.

Public surface: subspace algebra (:mod:`lowrankbp.core`), a dense LP solver
(:mod:`lowrankbp.linprog`), single-point l1 recovery and its tail bounds
(:mod:`lowrankbp.basis_pursuit`), synthetic instance generation
(:mod:`lowrankbp.generators`), robust subspace recovery
(:mod:`lowrankbp.recovery`), whole-dataset recovery
(:mod:`lowrankbp.pipeline`), the set-combinatorics toolkit
(:mod:`lowrankbp.combinatorics`, :mod:`lowrankbp.galois`), scikit-learn
style wrappers (:mod:`lowrankbp.estimators`) and the experiment harness
(:mod:`lowrankbp.harness`, CLI ``lowrank-bp``).
"""

from .core import (
    GaussianModel,
    IndexSet,
    Subspace,
    orthonormalize,
    principal_angle_distance,
    project,
)
from .basis_pursuit import (
    BpResult,
    TailBounds,
    expected_error_bound,
    recover,
    recover_1d,
    tail_probability_bounds,
    weighted_median,
)
from .generators import (
    Adversary,
    LargeSpike,
    ProblemInstance,
    RandomSign,
    WorstCase1D,
    ZeroOut,
    sample_instance,
    worst_case_1d_corrupt,
)
from .recovery import (
    RegressOutcome,
    RegressVerdict,
    SubspaceRecoveryResult,
    recover_subspace,
    robust_median,
    robust_rank_and_regress,
)
from .pipeline import (
    PipelineConfig,
    RecoveryReport,
    estimate_mean,
    recover_dataset,
)
from .combinatorics import (
    DominanceCertificate,
    SetFamily,
    aggregate_columns,
    axis_dominance,
    build_packing,
    conjectured_family_bounds,
    dominance_mass_lower_bound,
    has_perfect_matching,
    is_dominant_t1,
    max_family_no_matchable,
    verify_packing,
)
from .estimators import (
    BasisPursuitDenoiser,
    RobustDatasetRecovery,
    RobustSubspaceEstimator,
)

__version__ = "0.1.0"

__all__ = [
    "Adversary",
    "BasisPursuitDenoiser",
    "BpResult",
    "DominanceCertificate",
    "GaussianModel",
    "IndexSet",
    "LargeSpike",
    "PipelineConfig",
    "ProblemInstance",
    "RandomSign",
    "RecoveryReport",
    "RegressOutcome",
    "RegressVerdict",
    "RobustDatasetRecovery",
    "RobustSubspaceEstimator",
    "SetFamily",
    "Subspace",
    "SubspaceRecoveryResult",
    "TailBounds",
    "WorstCase1D",
    "ZeroOut",
    "aggregate_columns",
    "axis_dominance",
    "build_packing",
    "conjectured_family_bounds",
    "dominance_mass_lower_bound",
    "estimate_mean",
    "expected_error_bound",
    "has_perfect_matching",
    "is_dominant_t1",
    "max_family_no_matchable",
    "orthonormalize",
    "principal_angle_distance",
    "project",
    "recover",
    "recover_1d",
    "recover_dataset",
    "recover_subspace",
    "robust_median",
    "robust_rank_and_regress",
    "sample_instance",
    "tail_probability_bounds",
    "verify_packing",
    "weighted_median",
    "worst_case_1d_corrupt",
]
