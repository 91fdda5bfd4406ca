"""dynaprune: dataset pruning from training dynamics.

Scores every training sample by the windowed variance of its adjacent-epoch
loss differences, folded across training with an exponential moving average,
then keeps the top-scoring coreset and retrains with importance weights.
Ships binary artifact formats for trajectories/scores/coresets/datasets, six
reference baseline scorers, a deterministic toy trainer, brute-force oracles
for the method's two theoretical claims, and the `dynaprune` CLI.
"""

from .baselines import (
    BaselineParams,
    aum_score,
    dyn_unc_score,
    el2n_score,
    entropy_score,
    forgetting_score,
    random_score,
)
from .errors import (
    CapacityError,
    DataError,
    DynapruneError,
    FormatError,
    ParameterError,
    RangeError,
    ShapeError,
    TrainingError,
)
from .estimators import (
    AUMScorer,
    DynUncScorer,
    EL2NScorer,
    EntropyScorer,
    ForgettingScorer,
    RandomScorer,
    TDDSScorer,
    ToyClassifier,
)
from .formats import (
    Arch,
    Checkpoint,
    Coreset,
    Dataset,
    InMemoryTrajectory,
    Method,
    PayloadKind,
    ProvenanceTag,
    RecordingMode,
    ScoreTable,
    TrajectoryHeader,
    TrajectoryReader,
    TrajectoryWriter,
    clean_dataset,
    expected_coreset_size,
    load_trajectory,
    open_trajectory,
    read_checkpoint,
    read_coreset,
    read_dataset,
    read_header,
    read_scores,
    write_checkpoint,
    write_coreset,
    write_dataset,
    write_scores,
    write_trajectory,
)
from .manifest import RunManifest, file_sha256, read_manifest
from .oracles import (
    EquivalenceReport,
    MagnitudeMatrix,
    TaylorReport,
    equivalence_check,
    mse_objective,
    taylor_residual,
    variance_objective,
)
from .scoring import (
    DEFAULT_EPSILON,
    DeltaKind,
    DeltaSeries,
    TddsParams,
    ce_delta,
    compute_deltas,
    ema_update,
    kl_delta,
    select_top_m,
    tdds_scores,
    window_variance,
)
from .synthdata import gen_blobs, inject_duplicates, inject_label_noise
from .toytrain import (
    LrSchedule,
    ToyModel,
    TrainConfig,
    Weighting,
    evaluate,
    forward,
    grad,
    sample_loss,
    train_epochs,
    weighted_retrain,
)

__version__ = "0.1.0"

__all__ = [
    "AUMScorer", "Arch", "BaselineParams", "CapacityError", "Checkpoint",
    "Coreset", "DEFAULT_EPSILON", "DataError", "Dataset", "DeltaKind",
    "DeltaSeries", "DynUncScorer", "DynapruneError", "EL2NScorer",
    "EntropyScorer", "EquivalenceReport", "ForgettingScorer", "FormatError",
    "InMemoryTrajectory", "LrSchedule", "MagnitudeMatrix", "Method",
    "ParameterError", "PayloadKind", "ProvenanceTag", "RandomScorer",
    "RangeError", "RecordingMode", "RunManifest", "ScoreTable", "ShapeError",
    "TDDSScorer", "TaylorReport", "TddsParams", "ToyClassifier", "ToyModel",
    "TrainConfig", "TrainingError", "TrajectoryHeader", "TrajectoryReader",
    "TrajectoryWriter", "Weighting", "aum_score", "ce_delta", "clean_dataset",
    "compute_deltas", "dyn_unc_score", "el2n_score", "ema_update",
    "entropy_score", "equivalence_check", "evaluate", "expected_coreset_size",
    "file_sha256", "forgetting_score", "forward", "gen_blobs", "grad",
    "inject_duplicates", "inject_label_noise", "kl_delta", "load_trajectory",
    "mse_objective", "open_trajectory", "random_score", "read_checkpoint",
    "read_coreset", "read_dataset", "read_header", "read_manifest",
    "read_scores", "sample_loss", "select_top_m", "taylor_residual",
    "tdds_scores", "train_epochs", "variance_objective", "weighted_retrain",
    "window_variance", "write_checkpoint", "write_coreset", "write_dataset",
    "write_scores", "write_trajectory",
]
