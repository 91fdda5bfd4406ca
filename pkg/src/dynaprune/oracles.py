"""Brute-force verification of the two theoretical claims the scoring rule
rests on.

1. Pruning-as-variance equivalence: over per-epoch gradient magnitudes
   G[t][n], minimizing the reconstruction objective

       J(S) = (1/T) * sum_t sum_{n not in S} (G[t][n] - mean_t' G[t'][n])^2

   over kept subsets S is the same problem as maximizing the kept temporal
   variance

       R(S) = sum_{m in S} sum_t (G[t][m] - mean_t' G[t'][m])^2,

   because T*J(S) + R(S) is a constant of G. equivalence_check confirms the
   argmin/argmax coincidence (with ties) by exhaustively enumerating all
   C(N, M) subsets.

2. First-order Taylor consistency: the per-step loss difference divided by
   the step size approximates the gradient projected on the step direction;
   taylor_residual measures |lhs - rhs| for one SGD step.

Both objectives are computed directly from their definitions, in separate
code paths, so neither can inherit a bug from the other or from the scoring
module they validate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DataError, ParameterError, ShapeError
from .formats.checkpoint import Arch
from .toytrain import ToyModel, grad, sample_loss

MAX_ENUM_SAMPLES = 16


@dataclass(frozen=True, eq=False)
class MagnitudeMatrix:
    """G[t][n]: per-epoch (rows) per-sample (columns) gradient magnitudes."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"G must be a nonempty T x N matrix, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("G must be finite")
        if arr.min() < 0.0:
            raise DataError("G holds magnitudes; entries must be >= 0")
        object.__setattr__(self, "values", arr)

    @property
    def n_epochs(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


def _check_keep(g: MagnitudeMatrix, keep) -> list:
    cols = sorted(set(int(i) for i in keep))
    if not cols:
        raise ParameterError("keep must be a nonempty set of columns")
    if cols[0] < 0 or cols[-1] >= g.n_samples:
        raise ParameterError(f"keep indices out of range for N={g.n_samples}")
    return cols


def mse_objective(g: MagnitudeMatrix, keep) -> float:
    """J(S): mean-over-epochs squared reconstruction error of the pruned
    columns, with each pruned coordinate reconstructed by the optimal bias,
    its own temporal mean."""
    cols = _check_keep(g, keep)
    kept = set(cols)
    t = g.n_epochs
    total = 0.0
    for n in range(g.n_samples):
        if n in kept:
            continue
        col = g.values[:, n]
        bias = col.mean()
        for v in col:
            total += (v - bias) ** 2
    return total / t


def variance_objective(g: MagnitudeMatrix, keep) -> float:
    """R(S): total squared temporal deviation of the kept columns."""
    cols = _check_keep(g, keep)
    total = 0.0
    for m in cols:
        col = g.values[:, m]
        mean = col.mean()
        total += float(np.sum((col - mean) ** 2))
    return total


@dataclass(frozen=True)
class EquivalenceReport:
    argmin_j: frozenset
    argmax_r: frozenset
    equal: bool
    conservation_ok: bool
    max_conservation_error: float
    total_constant: float

    @property
    def passed(self) -> bool:
        return self.equal and self.conservation_ok


def equivalence_check(
    g: MagnitudeMatrix, m: int, rel_tol: float = 1e-9
) -> EquivalenceReport:
    """Enumerate every size-m kept subset; check that the J-minimizers and
    R-maximizers coincide as sets and that T*J + R is constant.

    Ties are grouped with a tolerance scaled to the total-variance constant,
    applied consistently to both objectives (the J threshold is the R
    threshold divided by T, matching R = total - T*J).
    """
    n, t = g.n_samples, g.n_epochs
    if n > MAX_ENUM_SAMPLES:
        raise CapacityError(f"N={n} exceeds enumeration bound {MAX_ENUM_SAMPLES}")
    if not 1 <= m < n:
        raise ParameterError(f"need 1 <= M < N, got M={m}, N={n}")
    # The constant, straight from the definition (not via J or R).
    total = 0.0
    for col in g.values.T:
        mean = col.mean()
        total += float(np.sum((col - mean) ** 2))
    scale = max(1.0, abs(total))
    tol_r = rel_tol * scale
    tol_j = tol_r / t

    subsets = list(itertools.combinations(range(n), m))
    j_vals = np.array([mse_objective(g, s) for s in subsets])
    r_vals = np.array([variance_objective(g, s) for s in subsets])

    cons_err = float(np.max(np.abs(t * j_vals + r_vals - total)))
    argmin_j = frozenset(
        subsets[i] for i in np.flatnonzero(j_vals <= j_vals.min() + tol_j)
    )
    argmax_r = frozenset(
        subsets[i] for i in np.flatnonzero(r_vals >= r_vals.max() - tol_r)
    )
    return EquivalenceReport(
        argmin_j=argmin_j,
        argmax_r=argmax_r,
        equal=argmin_j == argmax_r,
        conservation_ok=cons_err <= tol_r,
        max_conservation_error=cons_err,
        total_constant=total,
    )


@dataclass(frozen=True)
class TaylorReport:
    lhs: float
    rhs: float
    residual: float


def taylor_residual(
    theta_t: np.ndarray,
    theta_next: np.ndarray,
    x: np.ndarray,
    label: int,
    eta: float,
    arch: Arch = Arch.LINEAR,
    n_classes: int = 2,
    hidden: int = 0,
) -> TaylorReport:
    """First-order consistency of one SGD step on one sample.

    lhs = |loss(theta_next) - loss(theta_t)| / eta, the observed per-step
    loss difference; rhs = |grad(theta_t) . (theta_t - theta_next) / eta|,
    the gradient projected on the accumulated step direction.
    """
    if not eta > 0.0:
        raise ParameterError(f"eta must be > 0, got {eta}")
    theta_t = np.asarray(theta_t, dtype=np.float64)
    theta_next = np.asarray(theta_next, dtype=np.float64)
    if theta_t.shape != theta_next.shape:
        raise ShapeError(
            f"theta shapes differ: {theta_t.shape} vs {theta_next.shape}"
        )
    x = np.asarray(x, dtype=np.float64)
    model_t = ToyModel(arch, x.size, n_classes, hidden, theta_t)
    model_next = ToyModel(arch, x.size, n_classes, hidden, theta_next)
    loss_t = sample_loss(model_t, x, label)
    loss_next = sample_loss(model_next, x, label)
    lhs = abs(loss_next - loss_t) / eta
    g = grad(model_t, x.reshape(1, -1), [label])
    rhs = abs(float(g @ (theta_t - theta_next)) / eta)
    return TaylorReport(lhs=lhs, rhs=rhs, residual=abs(lhs - rhs))
