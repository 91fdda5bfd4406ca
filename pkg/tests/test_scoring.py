"""Scoring-pipeline tests: frozen high-precision constants, an independent
naive reference implementation, algebraic properties, and selection rules."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dynaprune as dp
from dynaprune.scoring import DEFAULT_EPSILON
from tests.conftest import make_delta_log, make_prob_log, random_probs

# Frozen constants, computed once with mpmath at 40 decimal digits.
KL_2CLASS = 0.3680642071684970699  # [0.5,0.5] -> [0.9,0.1]
KL_3CLASS = 0.03238212882129216  # [0.2,0.5,0.3] -> [0.3,0.4,0.3] on f32 inputs
CE_2CLASS = 0.5877866649021190  # label 0, f_t=[0.5,.5] -> f_{t+1}=[0.9,.1]


def test_kl_delta_frozen_value():
    f_t = np.array([0.5, 0.5], np.float32)
    f_n = np.array([0.9, 0.1], np.float32)
    got = dp.kl_delta(f_n, f_t)
    assert got == pytest.approx(KL_2CLASS, rel=1e-6)


def test_kl_delta_three_class_frozen_value():
    # sum over c of f_{t+1} * ln(f_{t+1}/f_t) with
    # f_t = [0.2, 0.5, 0.3], f_{t+1} = [0.3, 0.4, 0.3]:
    # 0.3*ln(1.5) + 0.4*ln(0.8) + 0.3*ln(1) on the f32-rounded inputs.
    f_t = np.array([0.2, 0.5, 0.3], np.float32)
    f_n = np.array([0.3, 0.4, 0.3], np.float32)
    assert dp.kl_delta(f_n, f_t) == pytest.approx(KL_3CLASS, rel=1e-6)


def test_ce_delta_frozen_value():
    f_t = np.array([0.5, 0.5], np.float32)
    f_n = np.array([0.9, 0.1], np.float32)
    assert dp.ce_delta(f_n, f_t, 0) == pytest.approx(CE_2CLASS, rel=1e-6)
    # label 1: ln(0.1) - ln(0.5) = -ln 5; magnitude used downstream
    assert dp.ce_delta(f_n, f_t, 1) == pytest.approx(-np.log(5.0), rel=1e-6)


def test_kl_self_is_zero():
    rng = np.random.default_rng(0)
    for _ in range(20):
        f = rng.dirichlet(np.ones(5)).astype(np.float32)
        assert dp.kl_delta(f, f) == 0.0


@settings(max_examples=50, deadline=None)
@given(c=st.integers(2, 8), seed=st.integers(0, 2**32 - 1))
def test_kl_clamp_lower_bound(c, seed):
    # The -2*C*eps*|ln eps| bound assumes exactly normalized inputs, so build
    # the distributions on a dyadic grid: k/2^20 is exact in float32 and the
    # true sum is exactly 1. Sparse dirichlet weights give zero entries,
    # which is what exercises the clamp.
    rng = np.random.default_rng(seed)
    grid = 1 << 20
    f_t = (rng.multinomial(grid, rng.dirichlet(np.ones(c) * 0.05)) / grid)
    f_n = (rng.multinomial(grid, rng.dirichlet(np.ones(c) * 0.05)) / grid)
    f_t, f_n = f_t.astype(np.float32), f_n.astype(np.float32)
    bound = 2 * c * DEFAULT_EPSILON * abs(np.log(DEFAULT_EPSILON))
    assert dp.kl_delta(f_n, f_t) >= -bound

    # float32-rounded rows need not sum to exactly 1; Gibbs' inequality then
    # allows an extra dip of |sum(f_next) - sum(f_prev)| below zero.
    f_t = rng.dirichlet(np.ones(c) * 0.05).astype(np.float32)
    f_n = rng.dirichlet(np.ones(c) * 0.05).astype(np.float32)
    slack = abs(float(f_n.sum(dtype=np.float64)) - float(f_t.sum(dtype=np.float64)))
    assert dp.kl_delta(f_n, f_t) >= -(bound + slack)


def test_delta_shape_errors():
    with pytest.raises(dp.ShapeError):
        dp.kl_delta(np.ones(3, np.float32) / 3, np.ones(4, np.float32) / 4)
    with pytest.raises(dp.RangeError):
        dp.ce_delta(np.ones(2, np.float32) / 2, np.ones(2, np.float32) / 2, 2)


# ----------------------------------------------------------- window statistics

def test_window_variance_frozen():
    assert dp.window_variance(np.array([1.0, 2.0, 3.0])) == 2.0
    assert dp.window_variance(np.array([5.0])) == 0.0
    # Sum form, not mean form: [0, 2] -> (1)^2 + (1)^2 = 2, not 1.
    assert dp.window_variance(np.array([0.0, 2.0])) == 2.0


@settings(max_examples=50, deadline=None)
@given(
    k=st.integers(1, 12),
    shift=st.floats(-50, 50, allow_nan=False),
    scale=st.floats(0.1, 20),
    seed=st.integers(0, 2**32 - 1),
)
def test_window_variance_translation_and_scale(k, shift, scale, seed):
    rng = np.random.default_rng(seed)
    w = rng.random(k) * 10
    base = dp.window_variance(w)
    assert dp.window_variance(w + shift) == pytest.approx(base, rel=1e-9, abs=1e-9)
    assert dp.window_variance(w * scale) == pytest.approx(
        base * scale * scale, rel=1e-9, abs=1e-12
    )


def test_ema_update_frozen():
    assert dp.ema_update(2.0, 4.0, 0.9) == pytest.approx(3.8)
    assert dp.ema_update(2.0, 4.0, 1.0) == 4.0
    with pytest.raises(dp.ParameterError):
        dp.ema_update(1.0, 1.0, 0.0)
    with pytest.raises(dp.ParameterError):
        dp.ema_update(1.0, 1.0, 1.5)


# ------------------------------------------------------ naive reference oracle

def naive_tdds(probs, labels, k, beta, delta_kind, eps=DEFAULT_EPSILON):
    """Straight-from-the-definitions reference: no vectorization tricks,
    f64 throughout on f32 delta magnitudes, independent of the library."""
    t_total, n, _c = probs.shape
    deltas = np.empty((n, t_total - 1), np.float64)
    for t in range(t_total - 1):
        f_t = probs[t].astype(np.float64)
        f_n = probs[t + 1].astype(np.float64)
        for i in range(n):
            if delta_kind == "kl":
                val = 0.0
                for c in range(_c):
                    a = max(float(f_n[i, c]), eps)
                    b = max(float(f_t[i, c]), eps)
                    val += a * np.log(a / b)
            else:
                y = labels[i]
                val = np.log(max(float(f_n[i, y]), eps)) - np.log(
                    max(float(f_t[i, y]), eps)
                )
            deltas[i, t] = abs(np.float32(val))
    n_windows = (t_total - 1) - k + 1
    scores = np.zeros(n)
    for i in range(n):
        ema = None
        acc = 0.0
        for w in range(n_windows):
            win = deltas[i, w : w + k]
            mu = win.mean()
            r = float(((win - mu) ** 2).sum())
            if beta == 0.0:
                acc += r
            elif ema is None:
                ema = r
            else:
                ema = beta * r + (1.0 - beta) * ema
        scores[i] = acc / n_windows if beta == 0.0 else ema
    return scores


@pytest.mark.parametrize("delta_kind", ["kl", "ce"])
@pytest.mark.parametrize("beta", [0.0, 0.3, 0.9, 1.0])
def test_tdds_scores_match_naive_reference(delta_kind, beta):
    rng = np.random.default_rng(42)
    n, c, t = 17, 4, 12
    probs = random_probs(rng, n, c, t)
    labels = rng.integers(0, c, n)
    log = dp.InMemoryTrajectory(
        dp.TrajectoryHeader(
            dp.PayloadKind.FULL_PROBS, dp.RecordingMode.TRAIN_TIME, n, c, t, labels
        ),
        [probs[e] for e in range(t)],
    )
    for k in (1, 3, t - 1):
        params = dp.TddsParams(
            window=k, beta=beta, delta_kind=dp.DeltaKind(delta_kind)
        )
        got = dp.tdds_scores(log, params).scores
        want = naive_tdds(probs, labels, k, beta, delta_kind)
        np.testing.assert_allclose(got, want, rtol=1e-9, atol=0)


def test_tdds_beta_one_equals_last_window():
    rng = np.random.default_rng(9)
    n, c, t, k = 8, 3, 10, 4
    probs = random_probs(rng, n, c, t)
    labels = rng.integers(0, c, n)
    log = dp.InMemoryTrajectory(
        dp.TrajectoryHeader(
            dp.PayloadKind.FULL_PROBS, dp.RecordingMode.TRAIN_TIME, n, c, t, labels
        ),
        [probs[e] for e in range(t)],
    )
    series = dp.compute_deltas(log, dp.TddsParams(window=k))
    last = np.array(
        [
            dp.window_variance(series.values[i, -k:].astype(np.float64))
            for i in range(n)
        ]
    )
    got = dp.tdds_scores(log, dp.TddsParams(window=k, beta=1.0)).scores
    np.testing.assert_allclose(got, last, rtol=1e-12)


def test_tdds_single_window_beta_irrelevant():
    # K = T-1 means exactly one window; every beta yields that window's R.
    rng = np.random.default_rng(3)
    log = make_prob_log(rng, 6, 3, 7)
    outs = [
        dp.tdds_scores(log, dp.TddsParams(window=6, beta=b)).scores
        for b in (0.0, 0.2, 0.9, 1.0)
    ]
    for other in outs[1:]:
        np.testing.assert_array_equal(outs[0], other)


def test_tdds_permutation_equivariance():
    rng = np.random.default_rng(14)
    n, c, t = 11, 3, 8
    probs = random_probs(rng, n, c, t)
    labels = rng.integers(0, c, n)
    perm = rng.permutation(n)
    base_log = dp.InMemoryTrajectory(
        dp.TrajectoryHeader(
            dp.PayloadKind.FULL_PROBS, dp.RecordingMode.TRAIN_TIME, n, c, t, labels
        ),
        [probs[e] for e in range(t)],
    )
    perm_log = dp.InMemoryTrajectory(
        dp.TrajectoryHeader(
            dp.PayloadKind.FULL_PROBS,
            dp.RecordingMode.TRAIN_TIME,
            n,
            c,
            t,
            labels[perm],
        ),
        [probs[e][perm] for e in range(t)],
    )
    params = dp.TddsParams(window=3, beta=0.7)
    base = dp.tdds_scores(base_log, params).scores
    permuted = dp.tdds_scores(perm_log, params).scores
    np.testing.assert_array_equal(permuted, base[perm])


def test_dual_path_bit_identity():
    # FullProbs log vs the DeltaMagnitudes log distilled from it must give
    # bitwise-equal scores: deltas are canonically f32 in both paths.
    rng = np.random.default_rng(21)
    n, c, t = 9, 4, 11
    log = make_prob_log(rng, n, c, t)
    params = dp.TddsParams(window=4, beta=0.85, delta_kind=dp.DeltaKind.KL)
    series = dp.compute_deltas(log, params)
    delta_log = series.to_trajectory(log.header.labels, c, log.header.recording_mode)
    a = dp.tdds_scores(log, params).scores
    b = dp.tdds_scores(delta_log, params).scores
    assert np.array_equal(a, b)


def test_tdds_window_too_large():
    rng = np.random.default_rng(0)
    log = make_prob_log(rng, 3, 2, 5)  # T-1 = 4 deltas
    with pytest.raises(dp.ParameterError):
        dp.tdds_scores(log, dp.TddsParams(window=5))


def test_tdds_worked_example_deltas_1234():
    # Hand-computed: deltas [1,2,3,4], K=3 -> windows [1,2,3], [2,3,4],
    # each has variance sum 2.0; EMA(0.9): 0.9*2 + 0.1*2 = 2; beta=0 avg = 2.
    n, t = 1, 5
    deltas = np.array([[1.0, 2.0, 3.0, 4.0]], np.float32)
    log = dp.InMemoryTrajectory(
        dp.TrajectoryHeader(
            dp.PayloadKind.DELTA_MAGNITUDES, dp.RecordingMode.TRAIN_TIME, n, 2, t, [0]
        ),
        [deltas[:, i] for i in range(t - 1)],
    )
    for beta in (0.0, 0.9, 1.0):
        got = dp.tdds_scores(log, dp.TddsParams(window=3, beta=beta)).scores
        assert got[0] == pytest.approx(2.0, rel=1e-12)


# ------------------------------------------------------------------ selection

def _table(values):
    return dp.ScoreTable(dp.Method.TDDS, 5, 2, 0.9, np.asarray(values, np.float64))


def test_select_top_m_worked_example():
    cs = dp.select_top_m(_table([3.0, 1.0, 2.0]), 1.0 / 3.0)
    # M = round(2/3 * 3) = 2; top-2 scores are 3.0 (idx 0) and 2.0 (idx 2).
    assert list(cs.indices) == [0, 2]
    assert list(cs.weights) == [3.0, 2.0]
    assert cs.n_total == 3


def test_select_top_m_tie_break_prefers_lower_index():
    cs = dp.select_top_m(_table([1.0, 1.0, 1.0, 1.0]), 0.5)
    assert list(cs.indices) == [0, 1]


def test_select_top_m_floor_guard():
    cs = dp.select_top_m(_table([5.0]), 0.9)
    assert cs.size == 1 and list(cs.indices) == [0]


def test_select_top_m_uniform_fallback_on_nonpositive():
    cs = dp.select_top_m(_table([0.0, -1.0, 2.0, 3.0]), 0.25)
    # M = 3; retained scores include 0.0 -> uniform weights.
    assert list(cs.indices) == [0, 2, 3]
    assert list(cs.weights) == [1.0, 1.0, 1.0]


def test_select_top_m_invalid_rate():
    with pytest.raises(dp.ParameterError):
        dp.select_top_m(_table(np.ones(4)), 0.0)
    with pytest.raises(dp.ParameterError):
        dp.select_top_m(_table(np.ones(4)), 1.0)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 50),
    p=st.floats(0.02, 0.98),
    seed=st.integers(0, 2**32 - 1),
)
def test_select_top_m_membership_invariant_under_monotone_transform(n, p, seed):
    rng = np.random.default_rng(seed)
    scores = rng.random(n) * 10 + 1.0  # distinct w.p. 1, all positive
    a = dp.select_top_m(_table(scores), p)
    b = dp.select_top_m(_table(scores * 3.0 + 5.0), p)
    assert np.array_equal(a.indices, b.indices)
    assert a.size == dp.expected_coreset_size(n, p)
