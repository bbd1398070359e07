"""DOA estimation for large uniform linear arrays.

Low-complexity direction finding built around overlapped subarray
partitioning: per-subarray rooting, coherent combination, and a narrowed
alternating-projection refinement, with grid/AP maximum-likelihood baselines
and the deterministic CRLB for calibration.
"""

from .arrays import (
    ArrayConfig,
    CovarianceMatrix,
    SnapshotBlock,
    SourceScene,
    SubarrayPlan,
    analytic_covariance,
    derive_seed,
    extract_subarray,
    plan_subarrays,
    sample_covariance,
    steering_matrix,
    steering_vector,
    synthesize,
)
from .dataset import (
    DatasetManifest,
    export_dataset,
    load_dataset_dir,
    load_labels,
    load_manifest,
    load_planes,
)
from .estimators import (
    AngleEstimate,
    ApSettings,
    EigenDecomposition,
    GridSpec,
    ap_refine,
    hermitian_eig,
    ml_grid_search,
    ml_objective,
    projection_matrix,
    root_music,
    sequential_init,
)
from .exceptions import (
    AngleDomainError,
    ArcsinDomainError,
    ConditioningError,
    DoakitError,
    GridSizeError,
    PartitionError,
    PipelineError,
    RootDegeneracyError,
    ValidationError,
)
from .metrics import (
    FlopModel,
    crlb,
    flops_ml_ap,
    flops_nn_forward,
    flops_opsc,
    flops_osap_cnn,
    rmse,
)
from .opsc import (
    CandidateSet,
    CombineWeights,
    build_candidate_set,
    coherent_combine,
    opsc_coarse,
    opsc_estimate,
)
from .osap import (
    combine_and_refine,
    combine_predictions,
    import_predictions,
    read_predictions,
    write_predictions,
)
from .sweeps import SweepConfig, run_complexity_sweep, run_rmse_sweep

__version__ = "0.1.0"
