"""Scikit-learn style wrappers around the scoring and training primitives.

The scorers follow the fit/score_samples idiom (fit consumes a trajectory
log, fitted scores land in scores_ / table_); ToyClassifier is a standard
classifier estimator over the deterministic SGD trainer. The functional API
in scoring/baselines/toytrain stays the ground truth; these classes only
add parameter handling, validation, and pipeline compatibility.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import baselines
from .errors import ParameterError
from .formats.checkpoint import Arch
from .formats.coreset import Coreset
from .formats.dataset import clean_dataset
from .formats.trajectory import InMemoryTrajectory, TrajectoryReader, load_trajectory
from .scoring import DeltaKind, TddsParams, select_top_m, tdds_scores
from .toytrain import TrainConfig, evaluate, forward, train_epochs


def _as_log(x):
    """Accept a path, an open reader, or an in-memory trajectory."""
    if isinstance(x, (TrajectoryReader, InMemoryTrajectory)):
        return x
    if isinstance(x, (str, bytes)):
        return load_trajectory(x)
    raise ParameterError(
        f"expected a trajectory log or a path to one, got {type(x).__name__}"
    )


class _TrajectoryScorer(BaseEstimator):
    """Shared fit/score_samples/select plumbing for every scorer."""

    def fit(self, X, y=None):
        log = _as_log(X)
        self.table_ = self._score(log)
        self.scores_ = self.table_.scores
        self.n_samples_ = len(self.scores_)
        return self

    def score_samples(self, X=None):
        check_is_fitted(self, "scores_")
        return self.scores_

    def select(self, pruning_rate: float) -> Coreset:
        check_is_fitted(self, "table_")
        return select_top_m(self.table_, pruning_rate)

    def _score(self, log):
        raise NotImplementedError


class TDDSScorer(_TrajectoryScorer):
    """Temporal dual-depth scorer (windowed delta variance + EMA fold)."""

    def __init__(self, epochs=None, window=10, beta=0.9, delta="kl",
                 epsilon=1e-12, signed_deltas=False):
        self.epochs = epochs
        self.window = window
        self.beta = beta
        self.delta = delta
        self.epsilon = epsilon
        self.signed_deltas = signed_deltas

    def _score(self, log):
        params = TddsParams(
            n_epochs=self.epochs,
            window=self.window,
            beta=self.beta,
            delta_kind=DeltaKind(self.delta),
            epsilon=self.epsilon,
            signed_deltas=self.signed_deltas,
        )
        return tdds_scores(log, params)


class EntropyScorer(_TrajectoryScorer):
    def __init__(self, epsilon=1e-12):
        self.epsilon = epsilon

    def _score(self, log):
        return baselines.entropy_score(log, epsilon=self.epsilon)


class ForgettingScorer(_TrajectoryScorer):
    def _score(self, log):
        return baselines.forgetting_score(log)


class EL2NScorer(_TrajectoryScorer):
    def __init__(self, el2n_epochs=10):
        self.el2n_epochs = el2n_epochs

    def _score(self, log):
        return baselines.el2n_score(log, el2n_epochs=self.el2n_epochs)


class AUMScorer(_TrajectoryScorer):
    def _score(self, log):
        return baselines.aum_score(log)


class DynUncScorer(_TrajectoryScorer):
    def __init__(self, dynunc_window=10):
        self.dynunc_window = dynunc_window

    def _score(self, log):
        return baselines.dyn_unc_score(log, dynunc_window=self.dynunc_window)


class RandomScorer(_TrajectoryScorer):
    def __init__(self, seed=0):
        self.seed = seed

    def _score(self, log):
        return baselines.random_score(
            log.header.n_samples, self.seed, n_epochs=log.header.n_epochs
        )


class ToyClassifier(ClassifierMixin, BaseEstimator):
    """Deterministic softmax-regression / tanh-MLP classifier.

    fit() accepts arbitrary label values and maps them onto contiguous
    class indices; predict() maps back.
    """

    def __init__(self, arch="linear", hidden=0, eta=0.01, epochs=30,
                 batch_size=32, seed=0, shuffle=True, lr_schedule="constant"):
        self.arch = arch
        self.hidden = hidden
        self.eta = eta
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.shuffle = shuffle
        self.lr_schedule = lr_schedule

    def _config(self) -> TrainConfig:
        arch = Arch.LINEAR if str(self.arch).lower() == "linear" else Arch.MLP
        return TrainConfig(
            eta=self.eta,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
            shuffle=self.shuffle,
            lr_schedule=self.lr_schedule,
            arch=arch,
            hidden=self.hidden,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ParameterError("need at least 2 classes")
        ds = clean_dataset(np.asarray(X, dtype=np.float64), y_idx, len(self.classes_))
        self.model_, self.log_ = train_epochs(ds, self._config(), log=True)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return np.atleast_2d(forward(self.model_, X))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def evaluate_nats(self, X, y):
        """(accuracy, mean CE loss) against the fitted class mapping."""
        check_is_fitted(self, "model_")
        X, y = check_X_y(X, y)
        lookup = {c: i for i, c in enumerate(self.classes_)}
        y_idx = np.array([lookup[v] for v in y], dtype=np.int64)
        ds = clean_dataset(np.asarray(X, dtype=np.float64), y_idx, len(self.classes_))
        return evaluate(self.model_, ds)
