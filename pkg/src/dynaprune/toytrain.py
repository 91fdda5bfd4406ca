"""A small deterministic classifier for generating real training dynamics:
softmax regression or a one-hidden-layer tanh MLP, trained with plain
minibatch SGD.

Everything runs in 64-bit arithmetic; probabilities are narrowed to float32
only when they enter a trajectory log. The SGD update is the sum form

    theta <- theta - eta_t * sum_n w_n * grad_n

(no 1/B), with optional per-sample importance weights for coreset
retraining. Given the same seed, dataset, and config, training is
bit-reproducible: parameter init and epoch shuffling draw from two PCG64
streams spawned from one seed, and reduction order is fixed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError, TrainingError
from .formats.checkpoint import Arch, Checkpoint, theta_length
from .formats.coreset import Coreset
from .formats.trajectory import (
    InMemoryTrajectory,
    PayloadKind,
    RecordingMode,
    TrajectoryHeader,
)
from .scoring import DEFAULT_EPSILON


class LrSchedule(enum.Enum):
    CONSTANT = "constant"
    COSINE = "cosine"


class Weighting(enum.Enum):
    NONE = "none"
    IMPORTANCE_RAW = "raw"
    IMPORTANCE_MEAN_ONE = "mean-one"


@dataclass(frozen=True)
class TrainConfig:
    eta: float = 0.01
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    shuffle: bool = True
    lr_schedule: LrSchedule = LrSchedule.CONSTANT
    weighting: Weighting = Weighting.IMPORTANCE_MEAN_ONE
    arch: Arch = Arch.LINEAR
    hidden: int = 0
    recording_mode: RecordingMode = RecordingMode.TRAIN_TIME

    def __post_init__(self):
        # eta = 0 is allowed: it freezes theta, which is useful for probing
        # the logging path in isolation (and finite, so harmless elsewhere).
        if not (np.isfinite(self.eta) and self.eta >= 0.0):
            raise ParameterError(f"eta must be finite and >= 0, got {self.eta}")
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {self.batch_size}")
        object.__setattr__(self, "lr_schedule", LrSchedule(self.lr_schedule))
        object.__setattr__(self, "weighting", Weighting(self.weighting))
        object.__setattr__(self, "arch", Arch(self.arch))
        object.__setattr__(self, "recording_mode", RecordingMode(self.recording_mode))
        if self.arch == Arch.MLP and self.hidden < 1:
            raise ParameterError("MLP needs hidden >= 1")
        if self.arch == Arch.LINEAR and self.hidden != 0:
            raise ParameterError("Linear arch takes hidden = 0")

    def lr_at(self, epoch: int) -> float:
        """Per-epoch learning rate; cosine anneals from eta toward 0."""
        if self.lr_schedule == LrSchedule.CONSTANT:
            return self.eta
        return self.eta * 0.5 * (1.0 + math.cos(math.pi * epoch / self.epochs))


class ToyModel:
    """Flat-parameter classifier. theta packs, in order, each layer's
    weight matrix (row-major) then its bias vector."""

    def __init__(self, arch: Arch, n_features: int, n_classes: int,
                 hidden: int = 0, theta: np.ndarray | None = None):
        arch = Arch(arch)
        if n_features < 1 or n_classes < 2:
            raise ParameterError(f"need D >= 1, C >= 2; got D={n_features}, C={n_classes}")
        if arch == Arch.MLP and hidden < 1:
            raise ParameterError("MLP needs hidden >= 1")
        if arch == Arch.LINEAR and hidden != 0:
            raise ParameterError("Linear arch takes hidden = 0")
        self.arch = arch
        self.n_features = n_features
        self.n_classes = n_classes
        self.hidden = hidden
        want = theta_length(arch, n_features, n_classes, hidden)
        if theta is None:
            theta = np.zeros(want, dtype=np.float64)
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (want,):
            raise ShapeError(f"theta shape {theta.shape}, expected ({want},)")
        self.theta = theta

    @classmethod
    def init_random(cls, arch: Arch, n_features: int, n_classes: int,
                    hidden: int, rng: np.random.Generator) -> "ToyModel":
        """Each layer uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases included."""
        arch = Arch(arch)
        parts = []
        if arch == Arch.LINEAR:
            bound = 1.0 / math.sqrt(n_features)
            parts.append(rng.uniform(-bound, bound, (n_features + 1) * n_classes))
        else:
            b1 = 1.0 / math.sqrt(n_features)
            parts.append(rng.uniform(-b1, b1, (n_features + 1) * hidden))
            b2 = 1.0 / math.sqrt(hidden)
            parts.append(rng.uniform(-b2, b2, (hidden + 1) * n_classes))
        return cls(arch, n_features, n_classes, hidden, np.concatenate(parts))

    def _unpack(self):
        d, c, h = self.n_features, self.n_classes, self.hidden
        if self.arch == Arch.LINEAR:
            w = self.theta[: d * c].reshape(d, c)
            b = self.theta[d * c :]
            return (w, b)
        n1 = d * h
        w1 = self.theta[:n1].reshape(d, h)
        b1 = self.theta[n1 : n1 + h]
        n2 = n1 + h
        w2 = self.theta[n2 : n2 + h * c].reshape(h, c)
        b2 = self.theta[n2 + h * c :]
        return (w1, b1, w2, b2)

    def logits(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.n_features:
            raise ShapeError(f"features have {x.shape[1]} dims, model wants {self.n_features}")
        if self.arch == Arch.LINEAR:
            w, b = self._unpack()
            return x @ w + b
        w1, b1, w2, b2 = self._unpack()
        return np.tanh(x @ w1 + b1) @ w2 + b2

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(self.arch, self.n_features, self.n_classes,
                          self.hidden, self.theta.copy())

    @classmethod
    def from_checkpoint(cls, ckpt: Checkpoint) -> "ToyModel":
        return cls(ckpt.arch, ckpt.n_features, ckpt.n_classes, ckpt.hidden,
                   ckpt.theta.copy())

    def clone(self) -> "ToyModel":
        return ToyModel(self.arch, self.n_features, self.n_classes,
                        self.hidden, self.theta.copy())


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: ToyModel, x) -> np.ndarray:
    """Predicted class probabilities; a vector in, a vector out."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    probs = _softmax(model.logits(x))
    return probs[0] if single else probs


def sample_loss(model: ToyModel, x, label: int,
                epsilon: float = DEFAULT_EPSILON) -> float:
    """Cross-entropy of one sample, -ln(max(f[y], eps)), in nats."""
    f = forward(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
    return -math.log(max(float(f[label]), epsilon))


def _forward_cache(model: ToyModel, x: np.ndarray):
    """(probabilities, hidden activations or None) for a prepared batch."""
    if model.arch == Arch.LINEAR:
        return _softmax(model.logits(x)), None
    w1, b1, w2, b2 = model._unpack()
    a = np.tanh(x @ w1 + b1)
    return _softmax(a @ w2 + b2), a


def _grad_from_cache(model: ToyModel, x: np.ndarray, y: np.ndarray,
                     w: np.ndarray, f: np.ndarray, a) -> np.ndarray:
    """Gradient given the forward pass; does not mutate f."""
    dz = f.copy()
    dz[np.arange(len(y)), y] -= 1.0
    dz *= w[:, None]
    if model.arch == Arch.LINEAR:
        return np.concatenate([(x.T @ dz).ravel(), dz.sum(axis=0)])
    w2 = model._unpack()[2]
    dz1 = (dz @ w2.T) * (1.0 - a * a)
    return np.concatenate(
        [(x.T @ dz1).ravel(), dz1.sum(axis=0), (a.T @ dz).ravel(), dz.sum(axis=0)]
    )


def grad(model: ToyModel, batch_x, batch_y, sample_weights=None) -> np.ndarray:
    """Weighted-sum cross-entropy gradient, sum_n w_n * grad_n, flat like theta.

    The gradient of CE w.r.t. logits is (f - onehot(y)); the rest is the
    chain rule through the (optional) tanh layer.
    """
    x = np.atleast_2d(np.asarray(batch_x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(batch_y)).astype(np.int64)
    n = x.shape[0]
    if y.shape != (n,):
        raise ShapeError(f"labels shape {y.shape} does not match batch size {n}")
    if y.size and (y.min() < 0 or y.max() >= model.n_classes):
        raise ShapeError(f"labels must lie in [0, {model.n_classes})")
    if sample_weights is None:
        w = np.ones(n, dtype=np.float64)
    else:
        w = np.asarray(sample_weights, dtype=np.float64)
        if w.shape != (n,):
            raise ShapeError(f"weights shape {w.shape} does not match batch size {n}")
        if w.size and w.min() < 0:
            raise ParameterError("sample weights must be >= 0")
    if x.shape[1] != model.n_features:
        raise ShapeError(f"features have {x.shape[1]} dims, model wants {model.n_features}")
    f, a = _forward_cache(model, x)
    return _grad_from_cache(model, x, y, w, f, a)


def _batch_slices(n: int, batch_size: int):
    for start in range(0, n, batch_size):
        yield slice(start, min(start + batch_size, n))


def _run_sgd(x: np.ndarray, y: np.ndarray, weights: np.ndarray,
             config: TrainConfig, labels_for_log: np.ndarray | None,
             log_classes: int) -> tuple[ToyModel, InMemoryTrajectory | None]:
    """Shared SGD loop. labels_for_log not None => record a trajectory."""
    n, d = x.shape
    seq = np.random.SeedSequence(config.seed)
    init_ss, shuffle_ss = seq.spawn(2)
    model = ToyModel.init_random(
        config.arch, d, log_classes, config.hidden,
        np.random.Generator(np.random.PCG64(init_ss)),
    )
    shuffle_rng = np.random.Generator(np.random.PCG64(shuffle_ss))
    logging = labels_for_log is not None
    epochs_out = (
        np.empty((config.epochs, n, log_classes), dtype=np.float32) if logging else None
    )
    for epoch in range(config.epochs):
        eta_t = config.lr_at(epoch)
        order = shuffle_rng.permutation(n) if config.shuffle else np.arange(n)
        for sl in _batch_slices(n, config.batch_size):
            idx = order[sl]
            bx, by, bw = x[idx], y[idx], weights[idx]
            f, a = _forward_cache(model, bx)
            if logging and config.recording_mode == RecordingMode.TRAIN_TIME:
                epochs_out[epoch, idx] = f.astype(np.float32)
            g = _grad_from_cache(model, bx, by, bw, f, a)
            model.theta = model.theta - eta_t * g
        if not np.all(np.isfinite(model.theta)):
            raise TrainingError(f"training diverged: non-finite parameters in epoch {epoch}")
        if logging and config.recording_mode == RecordingMode.EVAL_TIME:
            epochs_out[epoch] = _softmax(model.logits(x)).astype(np.float32)
    log = None
    if logging:
        header = TrajectoryHeader(
            PayloadKind.FULL_PROBS, config.recording_mode, n, log_classes,
            config.epochs, labels_for_log,
        )
        log = InMemoryTrajectory(header, epochs_out)
    return model, log


def train_epochs(dataset, config: TrainConfig,
                 log: bool = True) -> tuple[ToyModel, InMemoryTrajectory | None]:
    """Minibatch SGD over the whole dataset; optionally records a trajectory.

    The logged probability of each sample comes from its own minibatch
    forward pass (TrainTime) or from one full-dataset pass after the
    epoch's updates (EvalTime), per config.recording_mode.
    """
    x = np.ascontiguousarray(dataset.features, dtype=np.float64)
    y = dataset.labels.astype(np.int64)
    if x.shape[0] < 1:
        raise ParameterError("dataset is empty")
    weights = np.ones(len(y), dtype=np.float64)
    labels_for_log = dataset.labels if log else None
    return _run_sgd(x, y, weights, config, labels_for_log, dataset.n_classes)


def weighted_retrain(dataset, coreset: Coreset, config: TrainConfig) -> ToyModel:
    """Train on the coreset only, weighting per config.weighting:
    raw scores (ImportanceRaw), scores rescaled to mean 1 (the default,
    so the effective learning rate is preserved), or all-ones (None)."""
    if coreset.n_total != dataset.n_samples:
        raise ParameterError(
            f"coreset built over N={coreset.n_total}, dataset has {dataset.n_samples}"
        )
    idx = coreset.indices.astype(np.int64)
    x = np.ascontiguousarray(dataset.features[idx], dtype=np.float64)
    y = dataset.labels[idx].astype(np.int64)
    if config.weighting == Weighting.NONE:
        w = np.ones(len(idx), dtype=np.float64)
    elif config.weighting == Weighting.IMPORTANCE_RAW:
        w = coreset.weights.copy()
    elif np.ptp(coreset.weights) == 0.0:
        # Equal weights must normalize to exactly 1.0; w / w.mean() can be
        # off by an ulp because the mean of n equal floats need not round
        # back to the value itself.
        w = np.ones(len(idx), dtype=np.float64)
    else:
        w = coreset.weights / coreset.weights.mean()
    model, _ = _run_sgd(x, y, w, config, None, dataset.n_classes)
    return model


def evaluate(model: ToyModel, dataset,
             epsilon: float = DEFAULT_EPSILON) -> tuple[float, float]:
    """(accuracy, mean CE loss in nats); argmax ties go to the lower index."""
    x = np.ascontiguousarray(dataset.features, dtype=np.float64)
    y = dataset.labels.astype(np.int64)
    if x.shape[0] < 1:
        raise ParameterError("evaluation set is empty")
    f = _softmax(model.logits(x))
    acc = float(np.mean(np.argmax(f, axis=1) == y))
    target = np.maximum(f[np.arange(len(y)), y], epsilon)
    return acc, float(np.mean(-np.log(target)))
