"""CSV mirrors of the scores, coreset, and dataset artifacts.

Each mirror is a plain CSV with a header row, preceded by one comment line
(`# key=value ...`) carrying the scalar fields the binary header holds.
Floats are written with repr(), which Python guarantees to roundtrip
exactly, so csv -> object -> csv is stable.
"""

from __future__ import annotations

import csv

import numpy as np

from ..errors import FormatError
from .coreset import Coreset
from .dataset import Dataset, ProvenanceTag
from .scores import METHOD_NAMES, METHODS_BY_NAME, ScoreTable


def _write_meta(fh, pairs: dict) -> None:
    fh.write("# " + " ".join(f"{k}={v}" for k, v in pairs.items()) + "\n")


def _read_meta(fh) -> dict:
    line = fh.readline()
    if not line.startswith("# "):
        raise FormatError("missing metadata comment line")
    meta = {}
    for token in line[2:].split():
        if "=" not in token:
            raise FormatError(f"bad metadata token {token!r}")
        k, _, v = token.partition("=")
        meta[k] = v
    return meta


def write_scores_csv(path: str, table: ScoreTable) -> None:
    with open(path, "w", newline="") as fh:
        _write_meta(
            fh,
            {
                "method": METHOD_NAMES[table.method],
                "epochs": table.n_epochs,
                "window": table.window,
                "beta": repr(table.beta),
            },
        )
        w = csv.writer(fh)
        w.writerow(["index", "score"])
        for i, s in enumerate(table.scores):
            w.writerow([i, repr(float(s))])


def read_scores_csv(path: str) -> ScoreTable:
    with open(path, newline="") as fh:
        meta = _read_meta(fh)
        try:
            method = METHODS_BY_NAME[meta["method"]]
            epochs = int(meta["epochs"])
            window = int(meta["window"])
            beta = float(meta["beta"])
        except (KeyError, ValueError) as e:
            raise FormatError(f"bad scores metadata: {e}") from None
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["index", "score"]:
        raise FormatError("missing scores header row")
    scores = np.empty(len(rows) - 1, dtype=np.float64)
    try:
        for k, row in enumerate(rows[1:]):
            if int(row[0]) != k:
                raise FormatError(f"score rows out of order at {k}")
            scores[k] = float(row[1])
    except (IndexError, ValueError) as e:
        raise FormatError(f"bad score row: {e}") from None
    return ScoreTable(method, epochs, window, beta, scores)


def write_coreset_csv(path: str, coreset: Coreset) -> None:
    with open(path, "w", newline="") as fh:
        _write_meta(
            fh,
            {"n_total": coreset.n_total, "pruning_rate": repr(coreset.pruning_rate)},
        )
        w = csv.writer(fh)
        w.writerow(["index", "weight"])
        for i, wt in zip(coreset.indices, coreset.weights):
            w.writerow([int(i), repr(float(wt))])


def read_coreset_csv(path: str) -> Coreset:
    with open(path, newline="") as fh:
        meta = _read_meta(fh)
        try:
            n_total = int(meta["n_total"])
            p = float(meta["pruning_rate"])
        except (KeyError, ValueError) as e:
            raise FormatError(f"bad coreset metadata: {e}") from None
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["index", "weight"]:
        raise FormatError("missing coreset header row")
    try:
        indices = np.array([int(r[0]) for r in rows[1:]], dtype=np.uint64)
        weights = np.array([float(r[1]) for r in rows[1:]], dtype=np.float64)
    except (IndexError, ValueError) as e:
        raise FormatError(f"bad coreset row: {e}") from None
    return Coreset(n_total, indices, weights, p)


def write_dataset_csv(path: str, ds: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        _write_meta(fh, {"n_classes": ds.n_classes})
        w = csv.writer(fh)
        w.writerow(
            ["label", "tag", "ref", "original_label"]
            + [f"x{j}" for j in range(ds.n_features)]
        )
        for i in range(ds.n_samples):
            w.writerow(
                [
                    int(ds.labels[i]),
                    ProvenanceTag(ds.prov_tags[i]).name.lower(),
                    int(ds.prov_refs[i]),
                    int(ds.original_labels[i]),
                ]
                + [repr(float(v)) for v in ds.features[i]]
            )


def read_dataset_csv(path: str) -> Dataset:
    with open(path, newline="") as fh:
        meta = _read_meta(fh)
        try:
            c = int(meta["n_classes"])
        except (KeyError, ValueError) as e:
            raise FormatError(f"bad dataset metadata: {e}") from None
        rows = list(csv.reader(fh))
    if not rows or rows[0][:4] != ["label", "tag", "ref", "original_label"]:
        raise FormatError("missing dataset header row")
    d = len(rows[0]) - 4
    n = len(rows) - 1
    if n < 1 or d < 1:
        raise FormatError("dataset CSV has no records or no feature columns")
    tag_codes = {t.name.lower(): int(t) for t in ProvenanceTag}
    labels = np.empty(n, dtype=np.int64)
    tags = np.empty(n, dtype=np.int64)
    refs = np.empty(n, dtype=np.int64)
    orig = np.empty(n, dtype=np.int64)
    feats = np.empty((n, d), dtype=np.float64)
    try:
        for i, row in enumerate(rows[1:]):
            labels[i] = int(row[0])
            tags[i] = tag_codes[row[1]]
            refs[i] = int(row[2])
            orig[i] = int(row[3])
            feats[i] = [float(v) for v in row[4:]]
    except (IndexError, KeyError, ValueError) as e:
        raise FormatError(f"bad dataset row: {e}") from None
    return Dataset(feats, labels, c, tags, refs, orig)
