"""Input validation helpers shared by the estimators and protocols.

Token inputs are ragged lists of integer ids; they are padded into a
(batch, max_len) array plus a validity mask. Dense inputs are plain 2-D
float arrays. Labels are binary, domains are contiguous 0..k-1 indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Batch


class InputError(ValueError):
    pass


@dataclass
class ArrayData:
    """Padded/validated arrays for one dataset split."""

    ids: np.ndarray | None
    mask: np.ndarray | None
    features: np.ndarray | None
    labels: np.ndarray
    domains: np.ndarray | None

    def __len__(self) -> int:
        return len(self.labels)

    def batch(self, idx=None) -> Batch:
        if idx is None:
            idx = slice(None)
        if self.ids is not None:
            return Batch(ids=self.ids[idx], mask=self.mask[idx])
        return Batch(features=self.features[idx])

    def take(self, idx) -> "ArrayData":
        return ArrayData(
            ids=None if self.ids is None else self.ids[idx],
            mask=None if self.mask is None else self.mask[idx],
            features=None if self.features is None else self.features[idx],
            labels=self.labels[idx],
            domains=None if self.domains is None else self.domains[idx],
        )


def is_feature_matrix(X) -> bool:
    arr = np.asarray(X)
    return arr.ndim == 2 and np.issubdtype(arr.dtype, np.floating)


def check_token_sequences(X, vocab_size: int | None = None):
    """Pad ragged integer sequences; returns (ids, mask, vocab_size)."""
    seqs = []
    for i, seq in enumerate(X):
        arr = np.asarray(seq)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError(f"example {i}: token sequence must be non-empty and 1-D")
        if not np.issubdtype(arr.dtype, np.integer):
            raise InputError(f"example {i}: token ids must be integers, got {arr.dtype}")
        if arr.min() < 0:
            raise InputError(f"example {i}: negative token id {arr.min()}")
        seqs.append(arr.astype(np.int64))
    if not seqs:
        raise InputError("empty dataset")
    max_id = max(int(s.max()) for s in seqs)
    if vocab_size is None:
        vocab_size = max_id + 1
    elif max_id >= vocab_size:
        raise InputError(f"token id {max_id} >= vocab_size {vocab_size}")
    max_len = max(len(s) for s in seqs)
    ids = np.zeros((len(seqs), max_len), dtype=np.int64)
    mask = np.zeros((len(seqs), max_len))
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
        mask[i, : len(s)] = 1.0
    return ids, mask, int(vocab_size)


def check_feature_matrix(X) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InputError(f"feature matrix must be 2-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("feature matrix contains non-finite values")
    return arr


def check_labels(y, n: int) -> np.ndarray:
    arr = np.asarray(y)
    if arr.shape != (n,):
        raise InputError(f"labels shape {arr.shape} != ({n},)")
    arr = arr.astype(np.int64)
    bad = set(np.unique(arr)) - {0, 1}
    if bad:
        raise InputError(f"labels must be 0/1, found {sorted(bad)}")
    return arr


def check_domains(domains, n: int, num_domains: int | None = None) -> tuple[np.ndarray, int]:
    arr = np.asarray(domains)
    if arr.shape != (n,):
        raise InputError(f"domains shape {arr.shape} != ({n},)")
    arr = arr.astype(np.int64)
    if arr.min() < 0:
        raise InputError("negative domain index")
    inferred = int(arr.max()) + 1
    if num_domains is None:
        num_domains = inferred
    elif inferred > num_domains:
        raise InputError(f"domain index {inferred - 1} >= num_domains {num_domains}")
    return arr, int(num_domains)


def as_array_data(X, y, domains=None, vocab_size: int | None = None) -> tuple[ArrayData, int | None, int | None]:
    """Validate a dataset; returns (data, vocab_size or None, feature_dim or None)."""
    if is_feature_matrix(X):
        feats = check_feature_matrix(X)
        n = feats.shape[0]
        labels = check_labels(y, n)
        doms = None
        if domains is not None:
            doms, _ = check_domains(domains, n)
        return (
            ArrayData(ids=None, mask=None, features=feats, labels=labels, domains=doms),
            None,
            feats.shape[1],
        )
    ids, mask, vocab = check_token_sequences(X, vocab_size)
    n = ids.shape[0]
    labels = check_labels(y, n)
    doms = None
    if domains is not None:
        doms, _ = check_domains(domains, n)
    return ArrayData(ids=ids, mask=mask, features=None, labels=labels, domains=doms), vocab, None


def stratified_split_indices(labels, domains, val_fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Label-within-domain stratified index split; both sides non-empty per stratum."""
    if not 0.0 < val_fraction < 1.0:
        raise InputError(f"val_fraction={val_fraction} must be in (0, 1)")
    train_idx: list[int] = []
    val_idx: list[int] = []
    groups = domains if domains is not None else np.zeros(len(labels), dtype=np.int64)
    for d in np.unique(groups):
        for label in np.unique(labels):
            idx = np.nonzero((groups == d) & (labels == label))[0]
            if idx.size == 0:
                continue
            if idx.size < 2:
                raise InputError(
                    f"stratum (domain={d}, label={label}) has {idx.size} examples; need >= 2"
                )
            idx = idx.copy()
            rng.shuffle(idx)
            n_val = int(round(val_fraction * idx.size))
            n_val = min(max(n_val, 1), idx.size - 1)
            val_idx += idx[:n_val].tolist()
            train_idx += idx[n_val:].tolist()
    return np.array(sorted(train_idx)), np.array(sorted(val_idx))
