"""Temporal dual-depth scoring over trajectory logs.

The score of a sample is an exponential moving average, across sliding
K-epoch windows, of the variance of its adjacent-epoch loss differences:

    delta_t   = |loss difference between epochs t and t+1|   (KL or CE form)
    R_w       = sum over the window of (delta - window mean)^2
    R        <- beta * R_w + (1 - beta) * R                   (fold over windows)

T epochs yield T-1 deltas, so a window of K deltas slides into
W = (T-1) - K + 1 = T - K positions. The fold starts at the first window's
variance (no zero-init startup bias); beta = 0 is an explicit sentinel for
the simple average of all W window variances, and beta = 1 keeps only the
last window. Scores accumulate in 64-bit arithmetic on the 32-bit deltas the
log format stores, so the full-probability and pre-reduced delta paths give
bit-identical results.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, ParameterError, RangeError, ShapeError
from .formats.coreset import Coreset, expected_coreset_size
from .formats.scores import Method, ScoreTable
from .formats.trajectory import (
    InMemoryTrajectory,
    PayloadKind,
    RecordingMode,
    TrajectoryHeader,
)

DEFAULT_EPSILON = 1e-12


class DeltaKind(enum.Enum):
    KL = "kl"
    CE = "ce"


@dataclass(frozen=True)
class TddsParams:
    """Scoring parameters.

    n_epochs of None means "use the whole log"; otherwise the trajectory is
    truncated to its first n_epochs epochs. signed_deltas skips the absolute
    value on CE deltas (a sign-sensitive variant kept behind this flag for
    ablation; it requires a full-probability log).
    """

    n_epochs: int | None = None
    window: int = 10
    beta: float = 0.9
    delta_kind: DeltaKind = DeltaKind.KL
    epsilon: float = DEFAULT_EPSILON
    signed_deltas: bool = False

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ParameterError(f"beta must be in [0, 1], got {self.beta}")
        if not 0.0 < self.epsilon <= 1e-6:
            raise ParameterError(f"epsilon must be in (0, 1e-6], got {self.epsilon}")
        if self.window < 1:
            raise ParameterError(f"window must be >= 1, got {self.window}")
        if self.n_epochs is not None and self.n_epochs < 2:
            raise ParameterError(f"n_epochs must be >= 2, got {self.n_epochs}")
        object.__setattr__(self, "delta_kind", DeltaKind(self.delta_kind))

    def resolve(self, log_epochs: int) -> "TddsParams":
        """Pin n_epochs against a concrete log and check K against it."""
        t = log_epochs if self.n_epochs is None else self.n_epochs
        if t > log_epochs:
            raise ParameterError(f"params ask for T={t} epochs, log has {log_epochs}")
        if t < 2:
            raise ParameterError(f"need T >= 2 epochs, got {t}")
        if self.window > t - 1:
            raise ParameterError(
                f"window K={self.window} needs K+1 <= T, got T={t} "
                f"({t - 1} deltas yield {t - self.window} windows)"
            )
        return replace(self, n_epochs=t)


@dataclass(frozen=True, eq=False)
class DeltaSeries:
    """Per-sample |delta| magnitudes: values[n][t] for t = 0..T-2.

    Stored as float32, the canonical precision of the log format, so a
    series roundtripped through a delta-magnitude log is unchanged.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ShapeError(f"values must be N x (T-1), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("delta magnitudes must be finite")
        if arr.size and arr.min() < 0.0:
            raise DataError("delta magnitudes must be nonnegative")
        object.__setattr__(self, "values", arr)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_deltas(self) -> int:
        return self.values.shape[1]

    def to_trajectory(
        self,
        labels: np.ndarray,
        n_classes: int,
        recording_mode: RecordingMode = RecordingMode.TRAIN_TIME,
    ) -> InMemoryTrajectory:
        """Repackage as a DeltaMagnitudes trajectory log (T = n_deltas + 1)."""
        header = TrajectoryHeader(
            PayloadKind.DELTA_MAGNITUDES,
            recording_mode,
            self.n_samples,
            n_classes,
            self.n_deltas + 1,
            labels,
        )
        return InMemoryTrajectory(header, self.values.T.copy())


def _as_prob_vector(f, name: str) -> np.ndarray:
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be a vector, got shape {arr.shape}")
    return arr


def kl_delta(f_next, f_prev, epsilon: float = DEFAULT_EPSILON) -> float:
    """KL divergence from the epoch-t to the epoch-(t+1) prediction,
    sum_c f_next[c] * ln(max(f_next[c], eps) / max(f_prev[c], eps)).

    Nonnegative up to clamp error (>= -C * eps * |ln eps|) when the inputs
    sum to exactly 1; rows that are only approximately normalized (float32
    softmax outputs) can dip a further |sum(f_next) - sum(f_prev)| below
    zero, per Gibbs' inequality for unnormalized vectors.
    """
    fn = _as_prob_vector(f_next, "f_next")
    fp = _as_prob_vector(f_prev, "f_prev")
    if fn.shape != fp.shape:
        raise ShapeError(f"length mismatch: {fn.shape} vs {fp.shape}")
    if fn.size < 2:
        raise ShapeError("probability vectors need C >= 2")
    fn_c = np.maximum(fn, epsilon)
    fp_c = np.maximum(fp, epsilon)
    return float(np.sum(fn * (np.log(fn_c) - np.log(fp_c))))


def ce_delta(f_next, f_prev, target: int, epsilon: float = DEFAULT_EPSILON) -> float:
    """Cross-entropy loss difference for the target class,
    ln(max(f_next[y], eps)) - ln(max(f_prev[y], eps)). May be negative."""
    fn = _as_prob_vector(f_next, "f_next")
    fp = _as_prob_vector(f_prev, "f_prev")
    if fn.shape != fp.shape:
        raise ShapeError(f"length mismatch: {fn.shape} vs {fp.shape}")
    if not 0 <= target < fn.size:
        raise RangeError(f"target {target} out of range for C={fn.size}")
    return float(
        np.log(max(float(fn[target]), epsilon)) - np.log(max(float(fp[target]), epsilon))
    )


def _delta_rows(
    f_next: np.ndarray,
    f_prev: np.ndarray,
    labels: np.ndarray,
    kind: DeltaKind,
    epsilon: float,
) -> np.ndarray:
    """Vectorized signed delta for every sample (N x C blocks -> N)."""
    fn = f_next.astype(np.float64)
    fp = f_prev.astype(np.float64)
    if kind == DeltaKind.KL:
        return np.sum(fn * (np.log(np.maximum(fn, epsilon)) - np.log(np.maximum(fp, epsilon))), axis=1)
    rows = np.arange(len(labels))
    return np.log(np.maximum(fn[rows, labels], epsilon)) - np.log(
        np.maximum(fp[rows, labels], epsilon)
    )


def _iter_delta_columns(log, params: TddsParams):
    """Yield T-1 float32 delta columns, holding at most two epochs resident."""
    h = log.header
    t_used = params.n_epochs
    if h.payload_kind == PayloadKind.DELTA_MAGNITUDES:
        if params.signed_deltas:
            raise ParameterError(
                "signed_deltas needs a FullProbs log; delta-magnitude logs "
                "store magnitudes only"
            )
        # Pre-reduced logs pass through: the format does not record which
        # delta kind produced them, so params.delta_kind is not checkable.
        for t in range(t_used - 1):
            yield log.read_delta_block(t)
        return
    if h.n_classes < 2:
        raise ParameterError("delta scoring needs C >= 2 classes")
    labels = h.labels.astype(np.int64)
    prev = log.read_epoch(0)
    for t in range(1, t_used):
        cur = log.read_epoch(t)
        d = _delta_rows(cur, prev, labels, params.delta_kind, params.epsilon)
        if not params.signed_deltas:
            d = np.abs(d)
        yield d.astype(np.float32)
        prev = cur


def compute_deltas(log, params: TddsParams) -> DeltaSeries:
    """Materialize the |delta| series for the log's first T epochs."""
    params = params.resolve(log.header.n_epochs)
    if params.signed_deltas:
        raise ParameterError("DeltaSeries stores magnitudes; signed_deltas not representable")
    cols = list(_iter_delta_columns(log, params))
    return DeltaSeries(np.stack(cols, axis=1))


def window_variance(window, k: int | None = None) -> float:
    """Sum of squared deviations from the window mean (no 1/K, no Bessel)."""
    arr = np.asarray(window, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ShapeError(f"window must be a nonempty vector, got shape {arr.shape}")
    if k is not None and arr.size != k:
        raise ShapeError(f"window length {arr.size} != K={k}")
    return float(np.sum((arr - arr.mean()) ** 2))


def ema_update(r_prev: float, r_window: float, beta: float) -> float:
    """One fold step: beta * r_window + (1 - beta) * r_prev.

    beta = 0 is not a valid fold step (it is the simple-average sentinel,
    handled by tdds_scores).
    """
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"fold step needs 0 < beta <= 1, got {beta}")
    return beta * r_window + (1.0 - beta) * r_prev


def _window_variance_columns(stack: np.ndarray) -> np.ndarray:
    """Per-sample window variance for a (K, N) stack of delta columns."""
    mean = stack.mean(axis=0)
    return np.sum((stack - mean) ** 2, axis=0)


def tdds_scores(log, params: TddsParams) -> ScoreTable:
    """Score every sample of the log; streaming, two epochs resident."""
    params = params.resolve(log.header.n_epochs)
    t_used = params.n_epochs
    k = params.window
    n_windows = (t_used - 1) - k + 1
    buf: deque[np.ndarray] = deque(maxlen=k)
    scores: np.ndarray | None = None
    sa_sum: np.ndarray | None = None
    for col in _iter_delta_columns(log, params):
        buf.append(col.astype(np.float64))
        if len(buf) < k:
            continue
        var = _window_variance_columns(np.stack(buf))
        if params.beta == 0.0:
            sa_sum = var if sa_sum is None else sa_sum + var
        elif scores is None:
            scores = var
        else:
            scores = params.beta * var + (1.0 - params.beta) * scores
    if params.beta == 0.0:
        scores = sa_sum / n_windows
    return ScoreTable(
        method=Method.TDDS,
        n_epochs=t_used,
        window=k,
        beta=params.beta,
        scores=scores,
    )


def select_top_m(scores: ScoreTable, pruning_rate: float) -> Coreset:
    """Keep the M = max(1, round((1-p)*N)) highest-scoring samples.

    Ties break toward the lower index. Weights are the retained raw scores;
    if any retained score is <= 0 (possible for margin-style or all-zero
    tables) the weights fall back to uniform 1.0, since coreset weights must
    be strictly positive to be usable in weighted SGD.
    """
    p = float(np.float32(pruning_rate))
    if not 0.0 < p < 1.0:
        raise ParameterError(f"pruning_rate must be in (0, 1), got {pruning_rate}")
    s = scores.scores
    m = expected_coreset_size(len(s), p)
    order = np.argsort(-s, kind="stable")
    kept = np.sort(order[:m])
    weights = s[kept]
    if not np.all(weights > 0.0):
        weights = np.ones(m, dtype=np.float64)
    return Coreset(
        n_total=len(s), indices=kept.astype(np.uint64), weights=weights, pruning_rate=p
    )
