"""Binary and CSV artifact formats.

Four little-endian binary families share one envelope (magic, fixed header,
payload, trailing CRC32 over everything after the magic):

    TDLG  training trajectories (per-epoch probabilities or delta magnitudes)
    TDSC  per-sample score tables
    TDCS  coresets (kept indices + importance weights)
    TDDT  datasets with provenance; TDMD model checkpoints ride along here
"""

from .checkpoint import Arch, Checkpoint, read_checkpoint, theta_length, write_checkpoint
from .coreset import Coreset, expected_coreset_size, read_coreset, write_coreset
from .csvio import (
    read_coreset_csv,
    read_dataset_csv,
    read_scores_csv,
    write_coreset_csv,
    write_dataset_csv,
    write_scores_csv,
)
from .dataset import Dataset, ProvenanceTag, clean_dataset, read_dataset, write_dataset
from .scores import METHOD_NAMES, METHODS_BY_NAME, Method, ScoreTable, read_scores, write_scores
from .trajectory import (
    InMemoryTrajectory,
    PayloadKind,
    RecordingMode,
    TrajectoryHeader,
    TrajectoryReader,
    TrajectoryWriter,
    load_trajectory,
    open_trajectory,
    read_header,
    write_trajectory,
)

__all__ = [
    "Arch",
    "Checkpoint",
    "Coreset",
    "Dataset",
    "InMemoryTrajectory",
    "METHOD_NAMES",
    "METHODS_BY_NAME",
    "Method",
    "PayloadKind",
    "ProvenanceTag",
    "RecordingMode",
    "ScoreTable",
    "TrajectoryHeader",
    "TrajectoryReader",
    "TrajectoryWriter",
    "clean_dataset",
    "expected_coreset_size",
    "load_trajectory",
    "open_trajectory",
    "read_checkpoint",
    "read_coreset",
    "read_coreset_csv",
    "read_dataset",
    "read_dataset_csv",
    "read_header",
    "read_scores",
    "read_scores_csv",
    "theta_length",
    "write_checkpoint",
    "write_coreset",
    "write_coreset_csv",
    "write_dataset",
    "write_dataset_csv",
    "write_scores",
    "write_trajectory",
]
