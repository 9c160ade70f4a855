"""Training loop, leave-one-domain-out protocol, and the alpha/beta grid.

A run is fully determined by (seed, config, data): initialization and
batch order come from fixed derived streams, model selection snapshots
the parameters at the best validation accuracy, and patience-based early
stopping bounds the epoch count. Protocols clone an unfitted estimator
per fold/cell, so they compose with anything exposing the sklearn fit /
predict surface plus ``best_val_accuracy_``.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from . import losses, model, nn, seeding
from .datagen import DatasetBundle
from .validation import ArrayData

DEFAULT_GRID = (0.1, 1.0, 10.0, 100.0)

# Learning-rate presets: training the small encoder from scratch wants a
# larger step than fine-tuning a large pretrained encoder would.
LR_PRESETS = {"scratch": 1e-3, "pretrained-encoder": 1e-5}


class TrainConfigError(ValueError):
    pass


class NonFiniteLossError(RuntimeError):
    def __init__(self, step: int, terms: list[str]):
        self.step = step
        self.terms = terms
        super().__init__(f"non-finite loss at step {step}: {', '.join(terms)}")


@dataclass(frozen=True)
class TrainConfig:
    model: model.ModelConfig
    weights: losses.LossWeights = losses.LossWeights()
    lr: float = LR_PRESETS["scratch"]
    batch_size: int = 16
    epochs: int = 20
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise TrainConfigError(f"lr={self.lr} must be > 0")
        if self.batch_size < 1:
            raise TrainConfigError(f"batch_size={self.batch_size} must be >= 1")
        if self.epochs < 1:
            raise TrainConfigError(f"epochs={self.epochs} must be >= 1")
        if self.patience < 0:
            raise TrainConfigError(f"patience={self.patience} must be >= 0")

    @property
    def predict_head(self) -> str:
        # the joint head is only trained when the specific side is enabled
        return "joint" if self.weights.enable_specific else "classification"


@dataclass
class StepRecord:
    step: int
    breakdown: losses.LossBreakdown


@dataclass
class RunResult:
    params: dict[str, nn.Param]
    history: list[StepRecord]
    epoch_val_accuracy: list[float]
    epoch_train_loss: list[float]
    best_epoch: int
    best_val_accuracy: float
    head: str
    wall_seconds: float
    clamp_events: int
    test_accuracy: float | None = None


def _accuracy(params, cfg_model, data: ArrayData, head: str, chunk: int = 1024) -> float:
    hits = 0
    for start in range(0, len(data), chunk):
        idx = slice(start, start + chunk)
        labels, _ = model.predict(params, cfg_model, data.batch(idx), head=head)
        hits += int((labels == data.labels[idx]).sum())
    return hits / len(data)


def train(cfg: TrainConfig, train_data: ArrayData, val_data: ArrayData) -> RunResult:
    """Train the disentangling classifier; deterministic given (cfg, data)."""
    if len(train_data) == 0 or len(val_data) == 0:
        raise TrainConfigError("train and validation sets must be non-empty")
    if train_data.domains is None:
        raise TrainConfigError("training data needs domain indices")
    t0 = time.perf_counter()
    params = model.build_params(cfg.model)
    state = nn.AdamState.for_params(params)
    counter = nn.ClampCounter()
    shuffle_rng = seeding.rng(cfg.seed, seeding.K_SHUFFLE)
    head = cfg.predict_head

    history: list[StepRecord] = []
    epoch_val: list[float] = []
    epoch_loss: list[float] = []
    best_acc = -1.0
    best_epoch = -1
    best_params: dict[str, nn.Param] = {}
    since_best = 0
    step = 0
    n = len(train_data)

    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        losses_this_epoch = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            out, backward = model.forward(params, cfg.model, train_data.batch(idx))
            breakdown, head_grads = losses.loss_all(
                out, train_data.labels[idx], train_data.domains[idx], cfg.weights, counter
            )
            bad = breakdown.nonfinite_terms()
            if bad:
                raise NonFiniteLossError(step, bad)
            backward(head_grads)
            nn.adam_step(params, state, cfg.lr)
            nn.zero_grads(params)
            history.append(StepRecord(step, breakdown))
            losses_this_epoch.append(breakdown.all)
            step += 1
        epoch_loss.append(float(np.mean(losses_this_epoch)))
        acc = _accuracy(params, cfg.model, val_data, head)
        epoch_val.append(acc)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_params = {k: p.copy() for k, p in params.items()}
            since_best = 0
        else:
            since_best += 1
            if since_best > cfg.patience:
                break

    return RunResult(
        params=best_params,
        history=history,
        epoch_val_accuracy=epoch_val,
        epoch_train_loss=epoch_loss,
        best_epoch=best_epoch,
        best_val_accuracy=best_acc,
        head=head,
        wall_seconds=time.perf_counter() - t0,
        clamp_events=counter.events,
    )


def history_to_csv(history: list[StepRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("step",) + losses.LossBreakdown.FIELDS)
        for rec in history:
            writer.writerow((rec.step,) + rec.breakdown.as_tuple())


# ---------------------------------------------------------------------------
# Leave-one-domain-out protocol
# ---------------------------------------------------------------------------


class ProtocolError(ValueError):
    pass


@dataclass
class FoldResult:
    held_out: str
    accuracy: float
    best_val_accuracy: float
    best_epoch: int
    seed: int
    alpha: float | None = None
    beta: float | None = None


@dataclass
class LodoReport:
    method: str
    domains: tuple[str, ...]
    accuracies: dict[str, float]
    average: float
    folds: list[FoldResult] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "method": self.method,
            "domains": list(self.domains),
            "accuracies": self.accuracies,
            "average": self.average,
            "folds": [
                {
                    "held_out": f.held_out,
                    "accuracy": f.accuracy,
                    "best_val_accuracy": f.best_val_accuracy,
                    "best_epoch": f.best_epoch,
                    "seed": f.seed,
                    "alpha": f.alpha,
                    "beta": f.beta,
                }
                for f in self.folds
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def render(self) -> str:
        return render_accuracy_table([(self.method, self.accuracies, self.average)], self.domains)


def render_accuracy_table(rows, domains) -> str:
    """Rows of (label, per-domain accuracy dict, average) as a text table."""
    width = max(12, max(len(r[0]) for r in rows) + 2)
    header = "".ljust(width) + "".join(f"{d:>10}" for d in domains) + f"{'Avg':>10}"
    lines = [header]
    for label, accs, avg in rows:
        cells = "".join(f"{100 * accs[d]:>10.2f}" for d in domains)
        lines.append(label.ljust(width) + cells + f"{100 * avg:>10.2f}")
    return "\n".join(lines)


def domain_examples(bundle: DatasetBundle, domain: int):
    return bundle.examples_for(domain)


def examples_to_xy(examples):
    X = [list(ex.tokens) for ex in examples]
    y = [ex.label for ex in examples]
    return X, np.asarray(y, dtype=np.int64)


def _fold_training_data(bundle: DatasetBundle, train_domain_ids):
    """Pooled (X, y, remapped domains) over the given domains."""
    X: list[list[int]] = []
    y: list[int] = []
    doms: list[int] = []
    for rank, d in enumerate(train_domain_ids):
        for ex in bundle.examples_for(d):
            X.append(list(ex.tokens))
            y.append(ex.label)
            doms.append(rank)
    return X, np.asarray(y, dtype=np.int64), np.asarray(doms, dtype=np.int64)


def leave_one_domain_out(estimator, bundle: DatasetBundle, *, seed: int = 0,
                         method: str = "model") -> LodoReport:
    """One training run per held-out domain; the held-out domain is never
    read before its final evaluation (asserted via the bundle's read counter).
    """
    if bundle.num_domains < 2:
        raise ProtocolError(f"leave-one-domain-out needs >= 2 domains, got {bundle.num_domains}")
    names = bundle.vocab.domains
    accuracies: dict[str, float] = {}
    folds: list[FoldResult] = []
    for held in range(bundle.num_domains):
        baseline_reads = bundle.read_counts.get(held, 0)
        train_ids = [d for d in range(bundle.num_domains) if d != held]
        X, y, doms = _fold_training_data(bundle, train_ids)
        fold_seed = seeding.child_seed(seed, seeding.K_FOLD, held)
        est = clone(estimator)
        est.set_params(seed=fold_seed, vocab_size=len(bundle.vocab))
        est.fit(X, y, domains=doms)
        assert bundle.read_counts.get(held, 0) == baseline_reads, (
            f"held-out domain {held} was read during training"
        )
        test = bundle.examples_for(held)
        X_test, y_test = examples_to_xy(test)
        acc = float(np.mean(est.predict(X_test) == y_test))
        accuracies[names[held]] = acc
        folds.append(
            FoldResult(
                held_out=names[held],
                accuracy=acc,
                best_val_accuracy=float(est.best_val_accuracy_),
                best_epoch=int(est.best_epoch_),
                seed=fold_seed,
                alpha=getattr(est, "alpha", None),
                beta=getattr(est, "beta", None),
            )
        )
    average = float(np.mean(list(accuracies.values())))
    return LodoReport(method=method, domains=names, accuracies=accuracies,
                      average=average, folds=folds)


# ---------------------------------------------------------------------------
# Grid search over (alpha, beta)
# ---------------------------------------------------------------------------


@dataclass
class GridCell:
    alpha: float
    beta: float
    val_accuracy: float | None
    error: str | None = None


@dataclass
class GridSearchReport:
    cells: list[GridCell]
    best_alpha: float
    best_beta: float
    best_val_accuracy: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "best_alpha": self.best_alpha,
                "best_beta": self.best_beta,
                "best_val_accuracy": self.best_val_accuracy,
                "cells": [
                    {"alpha": c.alpha, "beta": c.beta, "val_accuracy": c.val_accuracy,
                     "error": c.error}
                    for c in self.cells
                ],
            },
            indent=2,
            sort_keys=True,
        )


def grid_search(estimator, bundle: DatasetBundle, alphas=DEFAULT_GRID, betas=DEFAULT_GRID,
                *, seed: int = 0) -> GridSearchReport:
    """Independent fits per (alpha, beta) cell, selected by validation
    accuracy only. Pass a bundle that already excludes any test domain.

    A failing cell is recorded with its error and skipped for selection.
    """
    if not alphas or not betas:
        raise ProtocolError("alpha and beta grids must be non-empty")
    X, y, doms = _fold_training_data(bundle, list(range(bundle.num_domains)))
    cells: list[GridCell] = []
    best: GridCell | None = None
    for i, alpha in enumerate(alphas):
        for j, beta in enumerate(betas):
            cell_seed = seeding.child_seed(seed, seeding.K_GRID_CELL, i, j)
            est = clone(estimator)
            est.set_params(alpha=alpha, beta=beta, seed=cell_seed,
                           vocab_size=len(bundle.vocab))
            try:
                est.fit(X, y, domains=doms)
                cell = GridCell(alpha, beta, float(est.best_val_accuracy_))
            except Exception as err:  # a failed cell is recorded, not fatal
                cell = GridCell(alpha, beta, None, error=f"{type(err).__name__}: {err}")
            cells.append(cell)
            if cell.error is None and (best is None or cell.val_accuracy > best.val_accuracy):
                best = cell
    if best is None:
        raise ProtocolError("every grid cell failed")
    return GridSearchReport(cells=cells, best_alpha=best.alpha, best_beta=best.beta,
                            best_val_accuracy=best.val_accuracy)


def subset_bundle(bundle: DatasetBundle, domain_ids) -> DatasetBundle:
    """A bundle restricted to the given domains (counted reads), with the
    domain list remapped in the given order."""
    picked = tuple(bundle.examples_for(d) for d in domain_ids)
    remap = {d: rank for rank, d in enumerate(domain_ids)}
    remapped = tuple(
        tuple(
            type(ex)(tokens=ex.tokens, label=ex.label, domain=remap[ex.domain],
                     features=ex.features)
            for ex in examples
        )
        for examples in picked
    )
    vocab = type(bundle.vocab)(
        tokens=bundle.vocab.tokens,
        pools=bundle.vocab.pools,
        domains=tuple(bundle.vocab.domains[d] for d in domain_ids),
    )
    return DatasetBundle(remapped, vocab, bundle.config)


def leave_one_domain_out_with_grid(
    estimator,
    bundle: DatasetBundle,
    alphas=DEFAULT_GRID,
    betas=DEFAULT_GRID,
    *,
    seed: int = 0,
    grid_estimator=None,
    method: str = "model+grid",
) -> tuple[LodoReport, dict[str, GridSearchReport]]:
    """Nested protocol: per held-out domain, pick (alpha, beta) on the
    training domains' validation splits, then train and test once.

    ``grid_estimator`` may be a cheaper prototype (fewer epochs) for the
    search phase; the final fold model uses ``estimator``.
    """
    if bundle.num_domains < 2:
        raise ProtocolError(f"leave-one-domain-out needs >= 2 domains, got {bundle.num_domains}")
    names = bundle.vocab.domains
    accuracies: dict[str, float] = {}
    folds: list[FoldResult] = []
    grids: dict[str, GridSearchReport] = {}
    for held in range(bundle.num_domains):
        baseline_reads = bundle.read_counts.get(held, 0)
        train_ids = [d for d in range(bundle.num_domains) if d != held]
        sub = subset_bundle(bundle, train_ids)
        grid = grid_search(
            grid_estimator if grid_estimator is not None else estimator,
            sub,
            alphas,
            betas,
            seed=seeding.child_seed(seed, seeding.K_FOLD, held, 0),
        )
        grids[names[held]] = grid
        X, y, doms = _fold_training_data(bundle, train_ids)
        fold_seed = seeding.child_seed(seed, seeding.K_FOLD, held)
        est = clone(estimator)
        est.set_params(seed=fold_seed, vocab_size=len(bundle.vocab),
                       alpha=grid.best_alpha, beta=grid.best_beta)
        est.fit(X, y, domains=doms)
        assert bundle.read_counts.get(held, 0) == baseline_reads, (
            f"held-out domain {held} was read during training"
        )
        X_test, y_test = examples_to_xy(bundle.examples_for(held))
        acc = float(np.mean(est.predict(X_test) == y_test))
        accuracies[names[held]] = acc
        folds.append(
            FoldResult(
                held_out=names[held],
                accuracy=acc,
                best_val_accuracy=float(est.best_val_accuracy_),
                best_epoch=int(est.best_epoch_),
                seed=fold_seed,
                alpha=grid.best_alpha,
                beta=grid.best_beta,
            )
        )
    average = float(np.mean(list(accuracies.values())))
    return (
        LodoReport(method=method, domains=names, accuracies=accuracies,
                   average=average, folds=folds),
        grids,
    )
