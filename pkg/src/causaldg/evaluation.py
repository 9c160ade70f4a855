"""Metrics, probes, method comparison tables, and representation export.

Probes are fresh linear classifiers trained on frozen representation
arrays; they cannot touch model parameters by construction (the model
only ever hands over numpy arrays). The exporter writes every per-kind
representation with a deterministic 2-component PCA projection so any
external projection tool can be applied downstream to the raw vectors.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

from . import training
from .datagen import DatasetBundle
from .estimators import LinearProbe
from .seeding import K_PROBE, rng
from .validation import InputError, stratified_split_indices


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise InputError(f"shape mismatch or empty: {y_true.shape} vs {y_pred.shape}")
    return float(np.mean(y_true == y_pred))


def params_digest(params) -> str:
    """Order-sensitive content hash of a parameter dict."""
    h = hashlib.sha256()
    for name in params:
        h.update(name.encode())
        h.update(np.ascontiguousarray(params[name].data).tobytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Linear probes on frozen representations
# ---------------------------------------------------------------------------


def linear_probe_accuracy(reps, targets, *, seed: int = 0, epochs: int = 200,
                          lr: float = 1e-2, val_fraction: float = 0.2) -> float:
    """Fit a fresh linear probe on a held-in split of the representations
    and report accuracy on the held-out split."""
    reps = np.asarray(reps, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    if len(np.unique(targets)) < 2:
        raise InputError("probe targets are degenerate (single class)")
    split_rng = rng(seed, K_PROBE, 1)
    train_idx, val_idx = stratified_split_indices(targets, None, val_fraction, split_rng)
    probe = LinearProbe(epochs=epochs, lr=lr, seed=seed)
    probe.fit(reps[train_idx], targets[train_idx])
    return accuracy(targets[val_idx], probe.predict(reps[val_idx]))


def probe_suite(estimator, X, domains, labels, *, seed: int = 0) -> dict[str, float]:
    """Domain probes on m_inv/m_spc and a sentiment probe on m_inv."""
    reps = estimator.representations(X)
    return {
        "domain_on_m_inv": linear_probe_accuracy(reps["m_inv"], domains, seed=seed),
        "domain_on_m_spc": linear_probe_accuracy(reps["m_spc"], domains, seed=seed),
        "sentiment_on_m_inv": linear_probe_accuracy(reps["m_inv"], labels, seed=seed),
    }


# ---------------------------------------------------------------------------
# Method comparison over seeds
# ---------------------------------------------------------------------------


@dataclass
class MethodRow:
    label: str
    per_domain: dict[str, float]  # mean over seeds
    average: float  # mean of per-seed LODO averages
    std: float  # std of per-seed LODO averages
    seeds: tuple[int, ...]


@dataclass
class EvalReport:
    domains: tuple[str, ...]
    rows: list[MethodRow]
    probes: dict[str, float] | None = None

    def render(self) -> str:
        table = training.render_accuracy_table(
            [(r.label, r.per_domain, r.average) for r in self.rows], self.domains
        )
        lines = [table]
        if len(self.rows) and len(self.rows[0].seeds) > 1:
            lines += [
                "",
                "std over seeds: "
                + ", ".join(f"{r.label}={r.std:.4f}" for r in self.rows),
            ]
        if self.probes:
            lines += ["", "probes: " + ", ".join(f"{k}={v:.4f}" for k, v in sorted(self.probes.items()))]
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "domains": list(self.domains),
                "rows": [
                    {
                        "label": r.label,
                        "per_domain": r.per_domain,
                        "average": r.average,
                        "std": r.std,
                        "seeds": list(r.seeds),
                    }
                    for r in self.rows
                ],
                "probes": self.probes,
            },
            indent=2,
            sort_keys=True,
        )


def evaluate_methods(bundle: DatasetBundle, methods: dict[str, object], seeds,
                     *, probes_for: str | None = None) -> EvalReport:
    """Leave-one-domain-out for every (method, seed); rows are seed means.

    ``methods`` maps a row label to an unfitted estimator prototype
    (cloned per run).
    """
    seeds = list(seeds)
    domains = bundle.vocab.domains
    rows: list[MethodRow] = []
    for label, prototype in methods.items():
        per_seed_avg = []
        per_domain_acc = {d: [] for d in domains}
        for s in seeds:
            report = training.leave_one_domain_out(clone(prototype), bundle, seed=s, method=label)
            per_seed_avg.append(report.average)
            for d in domains:
                per_domain_acc[d].append(report.accuracies[d])
        rows.append(
            MethodRow(
                label=label,
                per_domain={d: float(np.mean(v)) for d, v in per_domain_acc.items()},
                average=float(np.mean(per_seed_avg)),
                std=float(np.std(per_seed_avg)),
                seeds=tuple(seeds),
            )
        )
    return EvalReport(domains=domains, rows=rows)


# ---------------------------------------------------------------------------
# Representation export
# ---------------------------------------------------------------------------

REP_KINDS = ("h", "m_inv", "m_spc", "joint")


def pca_two_components(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered SVD projection onto up to two components.

    Sign convention: the first nonzero loading of each component is
    positive, so the projection is a deterministic function of the data.
    Returns (coords (n, 2), components (2, d)); a missing second
    component yields zero coordinates.
    """
    X = np.asarray(X, dtype=np.float64)
    center = X.mean(axis=0)
    Xc = X - center
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    comps = np.zeros((2, X.shape[1]))
    take = min(2, vt.shape[0])
    comps[:take] = vt[:take]
    for i in range(take):
        nz = np.nonzero(np.abs(comps[i]) > 1e-12)[0]
        if nz.size and comps[i, nz[0]] < 0:
            comps[i] = -comps[i]
    return Xc @ comps.T, comps


def export_representations(estimator, X, labels, domains, path,
                           domain_names=None) -> int:
    """Write one CSV row per (example, representation kind).

    Columns: example_id, domain, label, rep_kind, rep_0.., pca_x, pca_y.
    PCA is fitted per representation kind on the exported set. Returns
    the number of rows written.
    """
    labels = np.asarray(labels, dtype=np.int64)
    domains = np.asarray(domains, dtype=np.int64)
    reps = estimator.representations(X)
    max_dim = max(reps[k].shape[1] for k in REP_KINDS)
    header = ["example_id", "domain", "label", "rep_kind"]
    header += [f"rep_{i}" for i in range(max_dim)]
    header += ["pca_x", "pca_y"]
    names = domain_names if domain_names is not None else [str(d) for d in range(domains.max() + 1)]
    rows_written = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for kind in REP_KINDS:
            mat = reps[kind]
            coords, _ = pca_two_components(mat)
            for i in range(mat.shape[0]):
                raw = [repr(float(v)) for v in mat[i]]
                raw += [""] * (max_dim - mat.shape[1])
                writer.writerow(
                    [i, names[domains[i]], int(labels[i]), kind]
                    + raw
                    + [repr(float(coords[i, 0])), repr(float(coords[i, 1]))]
                )
                rows_written += 1
    return rows_written
