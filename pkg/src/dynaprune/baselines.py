"""Trajectory-computable comparison scorers: Random, Entropy, Forgetting,
EL2N, AUM, Dyn-Unc.

All six consume the same full-probability trajectory logs as the dual-depth
scorer and emit score tables where larger means "keep". They exist to give
the selection pipeline published reference points; none of them uses the
window/EMA machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .formats.scores import Method, ScoreTable
from .formats.trajectory import PayloadKind
from .scoring import DEFAULT_EPSILON


@dataclass(frozen=True)
class BaselineParams:
    """Knobs for the baseline family.

    el2n_epochs is the E of the first-E-epoch average; dynunc_window is the
    sliding-window length J; seed feeds the Random scorer only.
    """

    el2n_epochs: int = 10
    dynunc_window: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.el2n_epochs < 1:
            raise ParameterError(f"el2n_epochs must be >= 1, got {self.el2n_epochs}")
        if self.dynunc_window < 2:
            raise ParameterError(f"dynunc_window must be >= 2, got {self.dynunc_window}")


def _require_probs(log) -> None:
    if log.header.payload_kind != PayloadKind.FULL_PROBS:
        raise ParameterError("baseline scorers need a FullProbs log")


def entropy_score(log, epsilon: float = DEFAULT_EPSILON) -> ScoreTable:
    """Prediction entropy at the final epoch, -sum f * ln(max(f, eps))."""
    _require_probs(log)
    h = log.header
    f = log.read_epoch(h.n_epochs - 1).astype(np.float64)
    scores = -np.sum(f * np.log(np.maximum(f, epsilon)), axis=1)
    return ScoreTable(Method.ENTROPY, h.n_epochs, 0, 0.0, scores)


def forgetting_score(log) -> ScoreTable:
    """Count of correct-to-incorrect transitions between adjacent epochs.

    Correctness is argmax(f) == label with argmax ties resolved toward the
    lower class index. Samples never classified correctly in any epoch get
    the sentinel score T, ranking them most important.
    """
    _require_probs(log)
    h = log.header
    labels = h.labels.astype(np.int64)
    counts = np.zeros(h.n_samples, dtype=np.float64)
    ever_correct = np.zeros(h.n_samples, dtype=bool)
    prev = None
    for t in range(h.n_epochs):
        correct = np.argmax(log.read_epoch(t), axis=1) == labels
        ever_correct |= correct
        if prev is not None:
            counts += (prev & ~correct).astype(np.float64)
        prev = correct
    counts[~ever_correct] = float(h.n_epochs)
    return ScoreTable(Method.FORGETTING, h.n_epochs, 0, 0.0, counts)


def el2n_score(log, el2n_epochs: int = 10) -> ScoreTable:
    """Mean L2 norm of the error vector f - onehot(y) over the first E epochs."""
    _require_probs(log)
    h = log.header
    if not 1 <= el2n_epochs <= h.n_epochs:
        raise ParameterError(
            f"el2n_epochs must be in [1, {h.n_epochs}], got {el2n_epochs}"
        )
    labels = h.labels.astype(np.int64)
    rows = np.arange(h.n_samples)
    total = np.zeros(h.n_samples, dtype=np.float64)
    for t in range(el2n_epochs):
        err = log.read_epoch(t).astype(np.float64)
        err[rows, labels] -= 1.0
        total += np.sqrt(np.sum(err * err, axis=1))
    return ScoreTable(Method.EL2N, h.n_epochs, el2n_epochs, 0.0, total / el2n_epochs)


def aum_score(log) -> ScoreTable:
    """Mean probability margin f[y] - max over other classes, across all epochs."""
    _require_probs(log)
    h = log.header
    if h.n_classes < 2:
        raise ParameterError("aum_score needs C >= 2")
    labels = h.labels.astype(np.int64)
    rows = np.arange(h.n_samples)
    total = np.zeros(h.n_samples, dtype=np.float64)
    for t in range(h.n_epochs):
        f = log.read_epoch(t).astype(np.float64)
        target = f[rows, labels].copy()
        f[rows, labels] = -np.inf
        total += target - f.max(axis=1)
    return ScoreTable(Method.AUM, h.n_epochs, 0, 0.0, total / h.n_epochs)


def dyn_unc_score(log, dynunc_window: int = 10) -> ScoreTable:
    """Mean sliding-window population std of the target-class probability."""
    _require_probs(log)
    h = log.header
    j = dynunc_window
    if not 2 <= j <= h.n_epochs:
        raise ParameterError(f"dynunc_window must be in [2, {h.n_epochs}], got {j}")
    labels = h.labels.astype(np.int64)
    rows = np.arange(h.n_samples)
    p_target = np.empty((h.n_samples, h.n_epochs), dtype=np.float64)
    for t in range(h.n_epochs):
        p_target[:, t] = log.read_epoch(t).astype(np.float64)[rows, labels]
    n_windows = h.n_epochs - j + 1
    total = np.zeros(h.n_samples, dtype=np.float64)
    for w in range(n_windows):
        total += np.std(p_target[:, w : w + j], axis=1)
    return ScoreTable(Method.DYN_UNC, h.n_epochs, j, 0.0, total / n_windows)


def random_score(n_samples: int, seed: int, n_epochs: int = 0) -> ScoreTable:
    """Ranks 1..N of a uniform random permutation (PCG64 stream from seed)."""
    if n_samples < 1:
        raise ParameterError(f"n_samples must be >= 1, got {n_samples}")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n_samples)
    scores = np.empty(n_samples, dtype=np.float64)
    scores[perm] = np.arange(1, n_samples + 1, dtype=np.float64)
    return ScoreTable(Method.RANDOM, n_epochs, 0, 0.0, scores)
