"""Shared test helpers: small random artifact builders."""

from __future__ import annotations

import numpy as np
import pytest

from dynaprune import (
    InMemoryTrajectory,
    PayloadKind,
    RecordingMode,
    TrajectoryHeader,
)

# Populated by tests/test_acceptance.py through the record_criterion fixture:
# name -> (status, detail) with status in {"PASS", "FAIL", "SKIP"}. The
# fixture indirection guarantees the tests write to the same dict instance
# this plugin module reads, regardless of how test modules are imported.
ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


@pytest.fixture()
def record_criterion():
    def _rec(name: str, status: str, detail: str) -> None:
        ACCEPTANCE_RESULTS[name] = (status, detail)

    return _rec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, (status, detail) in ACCEPTANCE_RESULTS.items():
        tr.write_line(f"{name}: {status} - {detail}")


def random_probs(rng: np.random.Generator, n: int, c: int, t: int) -> np.ndarray:
    """(T, N, C) float32 probability blocks, rows summing to ~1."""
    return rng.dirichlet(np.ones(c), size=(t, n)).astype(np.float32)


def make_prob_log(
    rng: np.random.Generator,
    n: int,
    c: int,
    t: int,
    labels: np.ndarray | None = None,
    mode: RecordingMode = RecordingMode.TRAIN_TIME,
) -> InMemoryTrajectory:
    if labels is None:
        labels = rng.integers(0, c, size=n)
    header = TrajectoryHeader(PayloadKind.FULL_PROBS, mode, n, c, t, labels)
    return InMemoryTrajectory(header, random_probs(rng, n, c, t))


def make_delta_log(
    rng: np.random.Generator, n: int, t: int, c: int = 2
) -> InMemoryTrajectory:
    header = TrajectoryHeader(
        PayloadKind.DELTA_MAGNITUDES,
        RecordingMode.TRAIN_TIME,
        n,
        c,
        t,
        rng.integers(0, c, size=n),
    )
    blocks = rng.random((t - 1, n)).astype(np.float32)
    return InMemoryTrajectory(header, blocks)
