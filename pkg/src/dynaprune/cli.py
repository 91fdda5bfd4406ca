"""Command-line pipeline: generate -> train+log -> score -> select ->
retrain -> compare, plus the oracle battery (check) and artifact
inspection (info).

Every command that writes artifacts also writes a RunManifest JSON sidecar
next to its primary output; `compare --from-manifest` re-runs a recorded
comparison and must reproduce its artifacts bit-identically. Binary inputs
are recognized by magic, so --format only governs what gets written.
The DYNAPRUNE_LOG environment variable (debug|info|warning|error) controls
diagnostic verbosity.
"""

from __future__ import annotations

import dataclasses
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np

from . import baselines, oracles, synthdata
from .errors import DynapruneError, FormatError
from .formats import (
    Arch,
    Checkpoint,
    Coreset,
    Dataset,
    Method,
    METHODS_BY_NAME,
    PayloadKind,
    RecordingMode,
    ScoreTable,
    clean_dataset,
    open_trajectory,
    read_checkpoint,
    read_coreset,
    read_coreset_csv,
    read_dataset,
    read_dataset_csv,
    read_scores,
    read_scores_csv,
    write_checkpoint,
    write_coreset,
    write_coreset_csv,
    write_dataset,
    write_dataset_csv,
    write_scores,
    write_scores_csv,
)
from .manifest import RunManifest, manifest_path_for, read_manifest
from .scoring import DeltaKind, TddsParams, select_top_m, tdds_scores
from .toytrain import (
    LrSchedule,
    ToyModel,
    TrainConfig,
    Weighting,
    evaluate,
    grad,
    train_epochs,
    weighted_retrain,
)

log = logging.getLogger("dynaprune")

_METHOD_CHOICES = sorted(METHODS_BY_NAME)
_HOLDOUT_SEED = 1000003


def _setup_logging() -> None:
    level = os.environ.get("DYNAPRUNE_LOG", "warning").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        level = "WARNING"
    logging.basicConfig(level=getattr(logging, level), format="%(name)s: %(message)s")


def _sniff(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read(4)


def _read_dataset_any(path: str) -> Dataset:
    return read_dataset(path) if _sniff(path) == b"TDDT" else read_dataset_csv(path)


def _read_scores_any(path: str) -> ScoreTable:
    return read_scores(path) if _sniff(path) == b"TDSC" else read_scores_csv(path)


def _read_coreset_any(path: str) -> Coreset:
    return read_coreset(path) if _sniff(path) == b"TDCS" else read_coreset_csv(path)


def _train_config(epochs_t, eta, batch_size, seed, shuffle, lr_schedule,
                  arch, hidden, recording="train",
                  weighting="mean-one") -> TrainConfig:
    return TrainConfig(
        eta=eta,
        epochs=epochs_t,
        batch_size=batch_size,
        seed=seed,
        shuffle=shuffle,
        lr_schedule=LrSchedule(lr_schedule),
        weighting=Weighting(weighting),
        arch=Arch.MLP if arch == "mlp" else Arch.LINEAR,
        hidden=hidden,
        recording_mode=RecordingMode.EVAL_TIME if recording == "eval" else RecordingMode.TRAIN_TIME,
    )


def _score_one(trajectory, method: Method, *, window_k: int, beta: float,
               delta: str, epochs_t, el2n_epochs: int, dynunc_window: int,
               seed: int) -> ScoreTable:
    if method == Method.TDDS:
        params = TddsParams(
            n_epochs=epochs_t, window=window_k, beta=beta, delta_kind=DeltaKind(delta)
        )
        return tdds_scores(trajectory, params)
    if method == Method.RANDOM:
        return baselines.random_score(
            trajectory.header.n_samples, seed, n_epochs=trajectory.header.n_epochs
        )
    if method == Method.ENTROPY:
        return baselines.entropy_score(trajectory)
    if method == Method.FORGETTING:
        return baselines.forgetting_score(trajectory)
    if method == Method.EL2N:
        return baselines.el2n_score(trajectory, el2n_epochs=el2n_epochs)
    if method == Method.AUM:
        return baselines.aum_score(trajectory)
    return baselines.dyn_unc_score(trajectory, dynunc_window=dynunc_window)


def _finish_manifest(m: RunManifest, started: float, primary_output: str) -> None:
    m.duration_seconds = time.monotonic() - started
    m.write(manifest_path_for(primary_output))


@click.group()
@click.version_option(package_name="dynaprune")
def main() -> None:
    """Dataset pruning from training dynamics."""
    _setup_logging()


@main.command("gen-data")
@click.option("--output", required=True, type=click.Path())
@click.option("--per-class", default=500, show_default=True, type=int)
@click.option("--classes", default=4, show_default=True, type=int)
@click.option("--dims", default=10, show_default=True, type=int)
@click.option("--center-scale", default=3.0, show_default=True, type=float)
@click.option("--sigma", default=1.0, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--noise-fraction", default=0.0, show_default=True, type=float,
              help="Fraction of samples to mislabel (applied before duplication).")
@click.option("--dup-fraction", default=0.0, show_default=True, type=float)
@click.option("--dup-jitter", default=0.0, show_default=True, type=float)
@click.option("--format", "fmt", default="bin", show_default=True,
              type=click.Choice(["bin", "csv"]))
def cmd_gen_data(output, per_class, classes, dims, center_scale, sigma, seed,
                 noise_fraction, dup_fraction, dup_jitter, fmt) -> None:
    """Generate a blob dataset, optionally corrupted and duplicated."""
    started = time.monotonic()
    ds = synthdata.gen_blobs(per_class, classes, dims, center_scale, sigma, seed)
    if noise_fraction > 0:
        ds = synthdata.inject_label_noise(ds, noise_fraction, seed + 1)
    if dup_fraction > 0:
        ds = synthdata.inject_duplicates(ds, dup_fraction, dup_jitter, seed + 2)
    if fmt == "bin":
        write_dataset(output, ds)
    else:
        write_dataset_csv(output, ds)
    log.info("wrote %s (%d samples)", output, ds.n_samples)
    m = RunManifest(
        "gen-data",
        {"output": output, "per_class": per_class, "classes": classes,
         "dims": dims, "center_scale": center_scale, "sigma": sigma,
         "seed": seed, "noise_fraction": noise_fraction,
         "dup_fraction": dup_fraction, "dup_jitter": dup_jitter, "format": fmt},
        seeds=[seed],
        outputs=[output],
    )
    _finish_manifest(m, started, output)
    click.echo(f"dataset: {output}  N={ds.n_samples} D={ds.n_features} C={ds.n_classes} "
               f"tags={ds.tag_counts()}")


_train_options = [
    click.option("--epochs-t", default=30, show_default=True, type=int),
    click.option("--eta", default=0.01, show_default=True, type=float),
    click.option("--batch-size", default=32, show_default=True, type=int),
    click.option("--seed", default=0, show_default=True, type=int),
    click.option("--shuffle/--no-shuffle", default=True, show_default=True),
    click.option("--lr-schedule", default="constant", show_default=True,
                 type=click.Choice(["constant", "cosine"])),
    click.option("--arch", default="linear", show_default=True,
                 type=click.Choice(["linear", "mlp"])),
    click.option("--hidden", default=0, show_default=True, type=int),
]


def _with_options(opts):
    def deco(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn
    return deco


@main.command("train")
@click.option("--input", "input_", required=True, type=click.Path(exists=True))
@click.option("--output", required=True, type=click.Path(),
              help="Trajectory log (TDLG) destination.")
@click.option("--checkpoint", type=click.Path(), default=None,
              help="Optional model checkpoint (TDMD) destination.")
@click.option("--recording", default="train", show_default=True,
              type=click.Choice(["train", "eval"]))
@_with_options(_train_options)
def cmd_train(input_, output, checkpoint, recording, epochs_t, eta, batch_size,
              seed, shuffle, lr_schedule, arch, hidden) -> None:
    """Train on the full dataset and write the trajectory log."""
    started = time.monotonic()
    ds = _read_dataset_any(input_)
    config = _train_config(epochs_t, eta, batch_size, seed, shuffle, lr_schedule,
                           arch, hidden, recording)
    model, trajectory = train_epochs(ds, config, log=True)
    trajectory.write(output)
    outputs = [output]
    if checkpoint:
        write_checkpoint(checkpoint, model.to_checkpoint())
        outputs.append(checkpoint)
    acc, loss = evaluate(model, ds)
    m = RunManifest(
        "train",
        {"input": input_, "output": output, "checkpoint": checkpoint,
         "recording": recording, "epochs_t": epochs_t, "eta": eta,
         "batch_size": batch_size, "seed": seed, "shuffle": shuffle,
         "lr_schedule": lr_schedule, "arch": arch, "hidden": hidden},
        seeds=[seed],
        outputs=outputs,
    )
    m.add_input(input_)
    _finish_manifest(m, started, output)
    click.echo(f"log: {output}  train acc={acc:.4f} loss={loss:.4f}")


@main.command("score")
@click.option("--input", "input_", required=True, type=click.Path(exists=True))
@click.option("--output", required=True, type=click.Path())
@click.option("--method", default="tdds", show_default=True,
              type=click.Choice(_METHOD_CHOICES))
@click.option("--epochs-t", default=None, type=int,
              help="Use only the first T epochs of the log (default: all).")
@click.option("--window-k", default=10, show_default=True, type=int)
@click.option("--beta", default=0.9, show_default=True, type=float)
@click.option("--delta", default="kl", show_default=True,
              type=click.Choice(["kl", "ce"]))
@click.option("--el2n-epochs", default=10, show_default=True, type=int)
@click.option("--dynunc-window", default=10, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int,
              help="PRNG seed (random method only).")
@click.option("--format", "fmt", default="bin", show_default=True,
              type=click.Choice(["bin", "csv"]))
def cmd_score(input_, output, method, epochs_t, window_k, beta, delta,
              el2n_epochs, dynunc_window, seed, fmt) -> None:
    """Score every sample of a trajectory log."""
    started = time.monotonic()
    with open_trajectory(input_) as trajectory:
        table = _score_one(
            trajectory, METHODS_BY_NAME[method], window_k=window_k, beta=beta,
            delta=delta, epochs_t=epochs_t, el2n_epochs=el2n_epochs,
            dynunc_window=dynunc_window, seed=seed,
        )
    if fmt == "bin":
        write_scores(output, table)
    else:
        write_scores_csv(output, table)
    m = RunManifest(
        "score",
        {"input": input_, "output": output, "method": method,
         "epochs_t": epochs_t, "window_k": window_k, "beta": beta,
         "delta": delta, "el2n_epochs": el2n_epochs,
         "dynunc_window": dynunc_window, "seed": seed, "format": fmt},
        seeds=[seed],
        outputs=[output],
    )
    m.add_input(input_)
    _finish_manifest(m, started, output)
    click.echo(f"scores: {output}  method={method} N={table.n_samples}")


@main.command("select")
@click.option("--input", "input_", required=True, type=click.Path(exists=True))
@click.option("--output", required=True, type=click.Path())
@click.option("--rate", required=True, type=float, help="Pruning rate p in (0,1).")
@click.option("--format", "fmt", default="bin", show_default=True,
              type=click.Choice(["bin", "csv"]))
def cmd_select(input_, output, rate, fmt) -> None:
    """Select the top-M coreset from a score table."""
    if not 0.0 < rate < 1.0:
        raise click.UsageError(f"--rate must be in (0, 1), got {rate}")
    started = time.monotonic()
    table = _read_scores_any(input_)
    coreset = select_top_m(table, rate)
    if fmt == "bin":
        write_coreset(output, coreset)
    else:
        write_coreset_csv(output, coreset)
    m = RunManifest(
        "select",
        {"input": input_, "output": output, "rate": rate, "format": fmt},
        outputs=[output],
    )
    m.add_input(input_)
    _finish_manifest(m, started, output)
    click.echo(f"coreset: {output}  kept M={coreset.size} of N={coreset.n_total}")


@main.command("retrain")
@click.option("--input", "input_", required=True, type=click.Path(exists=True))
@click.option("--coreset", "coreset_path", required=True, type=click.Path(exists=True))
@click.option("--output", required=True, type=click.Path(),
              help="Model checkpoint (TDMD) destination.")
@click.option("--weighting", default="mean-one", show_default=True,
              type=click.Choice(["none", "raw", "mean-one"]))
@_with_options(_train_options)
def cmd_retrain(input_, coreset_path, output, weighting, epochs_t, eta,
                batch_size, seed, shuffle, lr_schedule, arch, hidden) -> None:
    """Train on a coreset with importance weighting."""
    started = time.monotonic()
    ds = _read_dataset_any(input_)
    coreset = _read_coreset_any(coreset_path)
    config = _train_config(epochs_t, eta, batch_size, seed, shuffle, lr_schedule,
                           arch, hidden, weighting=weighting)
    model = weighted_retrain(ds, coreset, config)
    write_checkpoint(output, model.to_checkpoint())
    acc, loss = evaluate(model, ds)
    m = RunManifest(
        "retrain",
        {"input": input_, "coreset": coreset_path, "output": output,
         "weighting": weighting, "epochs_t": epochs_t, "eta": eta,
         "batch_size": batch_size, "seed": seed, "shuffle": shuffle,
         "lr_schedule": lr_schedule, "arch": arch, "hidden": hidden},
        seeds=[seed],
        outputs=[output],
    )
    m.add_input(input_)
    m.add_input(coreset_path)
    _finish_manifest(m, started, output)
    click.echo(f"model: {output}  full-set acc={acc:.4f} loss={loss:.4f}")


@main.command("check")
@click.option("--equivalence-trials", default=200, show_default=True, type=int)
@click.option("--taylor-trials", default=20, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--max-n", default=10, show_default=True, type=int)
@click.option("--max-t", default=6, show_default=True, type=int)
def cmd_check(equivalence_trials, taylor_trials, seed, max_n, max_t) -> None:
    """Run the brute-force oracle battery; exit 0 iff everything passes."""
    failures = 0

    rng = np.random.Generator(np.random.PCG64(seed))
    worst_cons = 0.0
    equal_all = True
    for _ in range(equivalence_trials):
        n = int(rng.integers(2, max_n + 1))
        t = int(rng.integers(1, max_t + 1))
        g = oracles.MagnitudeMatrix(rng.random((t, n)))
        for m_keep in range(1, n):
            report = oracles.equivalence_check(g, m_keep)
            worst_cons = max(worst_cons, report.max_conservation_error)
            if not report.passed:
                equal_all = False
    status = "pass" if equal_all else "FAIL"
    click.echo(f"[{status}] equivalence: argmin J == argmax R and conservation held "
               f"on {equivalence_trials} instances (worst drift {worst_cons:.3e})")
    failures += 0 if equal_all else 1

    taylor_ok = True
    eta = 1e-3
    for _ in range(taylor_trials):
        d = int(rng.integers(2, 7))
        c = int(rng.integers(2, 5))
        bn = int(rng.integers(8, 17))
        x = rng.standard_normal((bn, d))
        y = rng.integers(0, c, size=bn)
        model = ToyModel.init_random(Arch.LINEAR, d, c, 0, rng)
        reports = {}
        for e in (eta, eta / 10.0):
            step = model.clone()
            g_full = grad(step, x, y)
            theta_next = step.theta - e * g_full
            reports[e] = oracles.taylor_residual(
                step.theta, theta_next, x[0], int(y[0]), e,
                arch=Arch.LINEAR, n_classes=c,
            )
        r1, r01 = reports[eta], reports[eta / 10.0]
        rel = r1.residual / r1.lhs if r1.lhs > 0 else 0.0
        decay = r01.residual / r1.residual if r1.residual > 0 else 0.0
        if rel >= 0.05 or not 0.02 <= decay <= 0.5:
            taylor_ok = False
    status = "pass" if taylor_ok else "FAIL"
    click.echo(f"[{status}] taylor: residual/lhs < 0.05 at eta=1e-3 and "
               f"residual decay in [0.02, 0.5] on {taylor_trials} steps")
    failures += 0 if taylor_ok else 1

    if failures:
        sys.exit(1)


@main.command("info")
@click.option("--input", "input_", required=True, type=click.Path(exists=True))
def cmd_info(input_) -> None:
    """Identify and summarize any artifact."""
    magic = _sniff(input_)
    if magic == b"TDLG":
        with open_trajectory(input_) as t:
            h = t.header
            click.echo(
                f"trajectory: N={h.n_samples} C={h.n_classes} T={h.n_epochs} "
                f"payload={h.payload_kind.name} mode={h.recording_mode.name}"
            )
    elif magic == b"TDSC":
        s = read_scores(input_)
        click.echo(
            f"scores: method={s.method.name} N={s.n_samples} T={s.n_epochs} "
            f"K={s.window} beta={s.beta:g} min={s.scores.min():.6g} "
            f"max={s.scores.max():.6g}"
        )
    elif magic == b"TDCS":
        cs = read_coreset(input_)
        click.echo(
            f"coreset: N={cs.n_total} M={cs.size} p={cs.pruning_rate:g} "
            f"weight range [{cs.weights.min():.6g}, {cs.weights.max():.6g}]"
        )
    elif magic == b"TDDT":
        ds = read_dataset(input_)
        click.echo(
            f"dataset: N={ds.n_samples} D={ds.n_features} C={ds.n_classes} "
            f"tags={ds.tag_counts()}"
        )
    elif magic == b"TDMD":
        ck = read_checkpoint(input_)
        click.echo(
            f"checkpoint: arch={ck.arch.name} D={ck.n_features} C={ck.n_classes} "
            f"H={ck.hidden} params={len(ck.theta)}"
        )
    else:
        raise FormatError(f"unrecognized artifact (magic {magic!r})")


def _compare_flags(input_, test_input, methods, rates, seeds, jobs, epochs_t,
                   eta, batch_size, shuffle, lr_schedule, arch, hidden,
                   recording, window_k, beta, delta, weighting, el2n_epochs,
                   dynunc_window, holdout_fraction) -> dict:
    return {
        "input": input_, "test_input": test_input, "methods": list(methods),
        "rates": list(rates), "seeds": list(seeds), "jobs": jobs,
        "epochs_t": epochs_t, "eta": eta, "batch_size": batch_size,
        "shuffle": shuffle, "lr_schedule": lr_schedule, "arch": arch,
        "hidden": hidden, "recording": recording, "window_k": window_k,
        "beta": beta, "delta": delta, "weighting": weighting,
        "el2n_epochs": el2n_epochs, "dynunc_window": dynunc_window,
        "holdout_fraction": holdout_fraction,
    }


def _compare_datasets(flags: dict):
    """(train dataset, test dataset) per the flags' holdout rules."""
    ds = _read_dataset_any(flags["input"])
    if flags["test_input"]:
        return ds, _read_dataset_any(flags["test_input"])
    frac = flags["holdout_fraction"]
    n = ds.n_samples
    n_test = max(1, int(np.floor(frac * n + 0.5)))
    if n_test >= n:
        raise DynapruneError("holdout fraction leaves no training data")
    perm = np.random.Generator(np.random.PCG64(_HOLDOUT_SEED)).permutation(n)
    test_idx, train_idx = np.sort(perm[:n_test]), np.sort(perm[n_test:])
    # The split keeps features/labels only; provenance does not survive
    # subsetting (duplicate references may cross the cut).
    train = clean_dataset(ds.features[train_idx], ds.labels[train_idx], ds.n_classes)
    test = clean_dataset(ds.features[test_idx], ds.labels[test_idx], ds.n_classes)
    return train, test


def _compare_seed_worker(args: tuple) -> dict:
    """One seed's full grid: train once, then score/select/retrain per cell.

    Runs in a worker process under --jobs > 1; everything it needs arrives
    in plain picklable values and it writes only seed-suffixed artifacts.
    """
    flags, seed, output_dir = args
    train_ds, test_ds = _compare_datasets(flags)
    config = _train_config(
        flags["epochs_t"], flags["eta"], flags["batch_size"], seed,
        flags["shuffle"], flags["lr_schedule"], flags["arch"], flags["hidden"],
        flags["recording"], flags["weighting"],
    )
    results: dict = {}
    outputs: list = []
    try:
        _, trajectory = train_epochs(train_ds, config, log=True)
    except DynapruneError as e:
        for method in flags["methods"]:
            for rate in flags["rates"]:
                results[(method, rate)] = ("error", f"train: {e}")
        return {"seed": seed, "results": results, "outputs": outputs}
    for method in flags["methods"]:
        try:
            table = _score_one(
                trajectory, METHODS_BY_NAME[method],
                window_k=flags["window_k"], beta=flags["beta"],
                delta=flags["delta"], epochs_t=None,
                el2n_epochs=flags["el2n_epochs"],
                dynunc_window=flags["dynunc_window"], seed=seed,
            )
        except DynapruneError as e:
            for rate in flags["rates"]:
                results[(method, rate)] = ("error", f"score: {e}")
            continue
        spath = os.path.join(output_dir, f"scores_{method}_seed{seed}.tdsc")
        write_scores(spath, table)
        outputs.append(spath)
        for rate in flags["rates"]:
            try:
                coreset = select_top_m(table, rate)
                cpath = os.path.join(
                    output_dir, f"coreset_{method}_p{rate:g}_seed{seed}.tdcs"
                )
                write_coreset(cpath, coreset)
                outputs.append(cpath)
                # Published protocol: importance weighting is the scoring
                # method's own device, so baselines retrain unweighted.
                cell_cfg = (
                    config if method == "tdds"
                    else dataclasses.replace(config, weighting=Weighting.NONE)
                )
                model = weighted_retrain(train_ds, coreset, cell_cfg)
                acc, loss = evaluate(model, test_ds)
                results[(method, rate)] = ("ok", (acc, loss))
            except DynapruneError as e:
                results[(method, rate)] = ("error", f"{e}")
    return {"seed": seed, "results": results, "outputs": outputs}


def _run_compare(flags: dict, output_dir: str) -> int:
    """Execute the grid; write table.csv / table.txt; return error count."""
    os.makedirs(output_dir, exist_ok=True)
    started = time.monotonic()
    work = [(flags, seed, output_dir) for seed in flags["seeds"]]
    if flags["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=flags["jobs"]) as pool:
            seed_results = list(pool.map(_compare_seed_worker, work))
    else:
        seed_results = [_compare_seed_worker(w) for w in work]

    outputs = []
    for sr in seed_results:
        outputs.extend(sr["outputs"])
    n_errors = 0
    rows = []
    for method in flags["methods"]:
        for rate in flags["rates"]:
            accs, losses, errors = [], [], []
            for sr in seed_results:
                status, value = sr["results"][(method, rate)]
                if status == "ok":
                    accs.append(value[0])
                    losses.append(value[1])
                else:
                    errors.append(f"seed {sr['seed']}: {value}")
            n_errors += len(errors)
            rows.append({
                "method": method, "rate": rate, "n_ok": len(accs),
                "mean_acc": float(np.mean(accs)) if accs else float("nan"),
                "std_acc": float(np.std(accs)) if accs else float("nan"),
                "mean_loss": float(np.mean(losses)) if losses else float("nan"),
                "std_loss": float(np.std(losses)) if losses else float("nan"),
                "errors": "; ".join(errors),
            })

    table_csv = os.path.join(output_dir, "table.csv")
    with open(table_csv, "w") as fh:
        fh.write("method,rate,n_ok,mean_acc,std_acc,mean_loss,std_loss,errors\n")
        for r in rows:
            fh.write(
                f"{r['method']},{r['rate']:g},{r['n_ok']},{r['mean_acc']:.6f},"
                f"{r['std_acc']:.6f},{r['mean_loss']:.6f},{r['std_loss']:.6f},"
                f"\"{r['errors']}\"\n"
            )
    outputs.append(table_csv)

    table_txt = os.path.join(output_dir, "table.txt")
    rates = flags["rates"]
    with open(table_txt, "w") as fh:
        header = "method".ljust(12) + "".join(f"p={r:g}".rjust(20) for r in rates)
        fh.write(header + "\n")
        for method in flags["methods"]:
            line = method.ljust(12)
            for rate in rates:
                row = next(r for r in rows if r["method"] == method and r["rate"] == rate)
                if row["n_ok"]:
                    cell = f"{row['mean_acc']:.4f} +/- {row['std_acc']:.4f}"
                else:
                    cell = "ERROR"
                line += cell.rjust(20)
            fh.write(line + "\n")
    outputs.append(table_txt)
    click.echo(open(table_txt).read().rstrip())

    m = RunManifest("compare", flags, seeds=list(flags["seeds"]), outputs=outputs)
    m.add_input(flags["input"])
    if flags["test_input"]:
        m.add_input(flags["test_input"])
    _finish_manifest(m, started, table_csv)
    if n_errors:
        click.echo(f"{n_errors} cell run(s) errored", err=True)
    return n_errors


def _parse_seeds(value: str) -> list:
    try:
        seeds = [int(s) for s in value.split(",") if s.strip() != ""]
    except ValueError:
        raise click.UsageError(f"--seeds must be comma-separated integers, got {value!r}")
    if not seeds:
        raise click.UsageError("--seeds is empty")
    return seeds


@main.command("compare")
@click.option("--input", "input_", type=click.Path(exists=True), default=None)
@click.option("--test-input", type=click.Path(exists=True), default=None,
              help="Evaluation dataset; default holds out part of --input.")
@click.option("--method", "methods", multiple=True,
              type=click.Choice(_METHOD_CHOICES),
              help="Repeatable; at least one unless replaying.")
@click.option("--rate", "rates", multiple=True, type=float, help="Repeatable.")
@click.option("--seeds", default="0,1,2", show_default=True,
              help="Comma-separated run seeds.")
@click.option("--jobs", default=1, show_default=True, type=int)
@click.option("--output-dir", required=True, type=click.Path())
@click.option("--recording", default="train", show_default=True,
              type=click.Choice(["train", "eval"]))
@click.option("--window-k", default=10, show_default=True, type=int)
@click.option("--beta", default=0.9, show_default=True, type=float)
@click.option("--delta", default="kl", show_default=True,
              type=click.Choice(["kl", "ce"]))
@click.option("--weighting", default="mean-one", show_default=True,
              type=click.Choice(["none", "raw", "mean-one"]),
              help="Importance weighting for tdds retraining.")
@click.option("--el2n-epochs", default=10, show_default=True, type=int)
@click.option("--dynunc-window", default=10, show_default=True, type=int)
@click.option("--holdout-fraction", default=0.25, show_default=True, type=float)
@click.option("--from-manifest", "from_manifest", type=click.Path(exists=True),
              default=None, help="Replay a recorded compare run.")
@click.option("--epochs-t", default=30, show_default=True, type=int)
@click.option("--eta", default=0.01, show_default=True, type=float)
@click.option("--batch-size", default=32, show_default=True, type=int)
@click.option("--shuffle/--no-shuffle", default=True, show_default=True)
@click.option("--lr-schedule", default="constant", show_default=True,
              type=click.Choice(["constant", "cosine"]))
@click.option("--arch", default="linear", show_default=True,
              type=click.Choice(["linear", "mlp"]))
@click.option("--hidden", default=0, show_default=True, type=int)
def cmd_compare(input_, test_input, methods, rates, seeds, jobs, output_dir,
                recording, window_k, beta, delta, weighting, el2n_epochs,
                dynunc_window, holdout_fraction, from_manifest, epochs_t, eta,
                batch_size, shuffle, lr_schedule, arch, hidden) -> None:
    """Grid-compare scoring methods across pruning rates and seeds."""
    if from_manifest:
        recorded = read_manifest(from_manifest)
        if recorded.subcommand != "compare":
            raise click.UsageError(
                f"manifest records a {recorded.subcommand!r} run, not compare"
            )
        flags = recorded.flags
    else:
        if input_ is None:
            raise click.UsageError("--input is required (unless --from-manifest)")
        if not methods:
            raise click.UsageError("give at least one --method")
        if not rates:
            raise click.UsageError("give at least one --rate")
        for rate in rates:
            if not 0.0 < rate < 1.0:
                raise click.UsageError(f"--rate must be in (0, 1), got {rate}")
        flags = _compare_flags(
            input_, test_input, methods, rates, _parse_seeds(seeds), jobs,
            epochs_t, eta, batch_size, shuffle, lr_schedule, arch, hidden,
            recording, window_k, beta, delta, weighting, el2n_epochs,
            dynunc_window, holdout_fraction,
        )
    n_errors = _run_compare(flags, output_dir)
    if n_errors:
        sys.exit(1)


if __name__ == "__main__":
    main()
