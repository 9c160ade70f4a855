"""Minimal reverse-mode neural building blocks on float64 numpy.

The model is a fixed feed-forward pipeline, so there is no general tape:
each layer function returns its output together with a backward closure
that propagates an upstream gradient and accumulates parameter gradients
in place. Analytic backwards are verified against central finite
differences by ``grad_check``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

CHECKPOINT_MAGIC = b"CKPT"
CHECKPOINT_VERSION = 1


class NNError(ValueError):
    """Shape/domain errors in the neural stack."""


class NonFiniteGradientError(NNError):
    def __init__(self, name: str):
        self.param_name = name
        super().__init__(f"non-finite gradient for parameter {name!r}")


class CheckpointError(NNError):
    pass


class Param:
    """A trainable tensor: float64 data plus a same-shape gradient accumulator."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        self.data = np.array(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad.fill(0.0)

    def copy(self) -> "Param":
        p = Param(self.data)
        p.grad = self.grad.copy()
        return p


def zero_grads(params: dict[str, Param]) -> None:
    for p in params.values():
        p.zero_grad()


# ---------------------------------------------------------------------------
# Layers: forward returns (output, backward); backward takes the upstream
# gradient, accumulates into Param.grad, and returns the input gradient.
# ---------------------------------------------------------------------------


def linear(x: np.ndarray, w: Param, b: Param):
    """y = x @ w + b for x of shape (batch, in)."""
    if x.ndim != 2 or x.shape[1] != w.data.shape[0]:
        raise NNError(f"linear shape mismatch: x {x.shape} vs w {w.data.shape}")
    y = x @ w.data + b.data

    def backward(grad_y: np.ndarray) -> np.ndarray:
        w.grad += x.T @ grad_y
        b.grad += grad_y.sum(axis=0)
        return grad_y @ w.data.T

    return y, backward


def relu(x: np.ndarray):
    """Elementwise max(x, 0); subgradient at 0 taken as 0."""
    mask = x > 0
    y = np.where(mask, x, 0.0)

    def backward(grad_y: np.ndarray) -> np.ndarray:
        return grad_y * mask

    return y, backward


def tanh_act(x: np.ndarray):
    y = np.tanh(x)

    def backward(grad_y: np.ndarray) -> np.ndarray:
        return grad_y * (1.0 - y * y)

    return y, backward


def embedding(table: Param, ids: np.ndarray):
    """Row lookup (batch, seq) -> (batch, seq, dim); backward scatter-adds."""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise NNError(
            f"token id out of range: table has {table.data.shape[0]} rows, "
            f"ids span [{ids.min()}, {ids.max()}]"
        )
    rows = table.data[ids]

    def backward(grad_rows: np.ndarray) -> None:
        np.add.at(table.grad, ids, grad_rows)

    return rows, backward


def mean_pool(rows: np.ndarray, mask: np.ndarray | None = None):
    """Average over the sequence axis of (batch, seq, dim).

    ``mask`` (batch, seq) marks valid positions; rows must contain at least
    one valid position each.
    """
    if mask is None:
        mask = np.ones(rows.shape[:2])
    counts = mask.sum(axis=1)
    if np.any(counts <= 0):
        raise NNError("mean_pool over an empty sequence")
    weights = mask / counts[:, None]
    pooled = (rows * weights[:, :, None]).sum(axis=1)

    def backward(grad_pooled: np.ndarray) -> np.ndarray:
        return grad_pooled[:, None, :] * weights[:, :, None]

    return pooled, backward


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_ce(logits: np.ndarray, targets: np.ndarray):
    """Per-example cross-entropy from logits, numerically stable.

    Returns (losses, probs, backward) where backward takes per-example
    weights and yields the logit gradient sum_i w_i * d(loss_i)/d(logits).
    """
    targets = np.asarray(targets, dtype=np.int64)
    n, c = logits.shape
    if targets.min() < 0 or targets.max() >= c:
        raise NNError(f"target out of range for {c} classes")
    if not np.all(np.isfinite(logits)):
        raise NNError("non-finite logits")
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    losses = log_norm - z[np.arange(n), targets]
    probs = np.exp(z - log_norm[:, None])

    def backward(weights: np.ndarray) -> np.ndarray:
        grad = probs.copy()
        grad[np.arange(n), targets] -= 1.0
        return grad * np.asarray(weights)[:, None]

    return losses, probs, backward


@dataclass
class ClampCounter:
    """Counts how often mixture probabilities were clamped before log."""

    events: int = 0

    def bump(self, n: int) -> None:
        self.events += int(n)


PROB_FLOOR = 1e-12


def ce_on_probs(probs: np.ndarray, targets: np.ndarray, counter: ClampCounter | None = None):
    """Cross-entropy applied to an already-normalized probability vector.

    Probabilities below ``PROB_FLOOR`` are clamped before the log (mixtures
    can underflow early in training); clamps are tallied on ``counter``.
    Returns (losses, backward) with backward as in ``softmax_ce`` but for
    the probability-space gradient.
    """
    targets = np.asarray(targets, dtype=np.int64)
    n, c = probs.shape
    if targets.min() < 0 or targets.max() >= c:
        raise NNError(f"target out of range for {c} classes")
    sums = probs.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6) or np.any(probs < -1e-12):
        raise NNError("ce_on_probs expects rows that are probability distributions")
    picked = probs[np.arange(n), targets]
    clamped = np.maximum(picked, PROB_FLOOR)
    if counter is not None:
        counter.bump((picked < PROB_FLOOR).sum())
    losses = -np.log(clamped)

    def backward(weights: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(probs)
        grad[np.arange(n), targets] = -np.asarray(weights) / clamped
        return grad

    return losses, backward


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    """Bias-corrected Adam moments, keyed like the parameter dict."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: dict[str, Param], **kw) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p.data) for k, p in params.items()},
            v={k: np.zeros_like(p.data) for k, p in params.items()},
            **kw,
        )


def adam_step(params: dict[str, Param], state: AdamState, lr: float) -> None:
    """One in-place Adam update from the gradients stored on the params."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for name, p in params.items():
        g = p.grad
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(name)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


# ---------------------------------------------------------------------------
# Finite-difference gradient checking
# ---------------------------------------------------------------------------


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    per_param: dict[str, float]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tol


def grad_check(f, params: dict[str, Param], h: float = 1e-5, tol: float = 1e-6) -> GradCheckReport:
    """Compare stored analytic gradients against central differences of ``f``.

    ``f`` must be a deterministic scalar function of the current parameter
    data; the caller computes analytic gradients into ``Param.grad`` before
    calling. Relative error uses max(|analytic|, |numeric|, 1e-6) in the
    denominator so exactly-zero coordinates compare cleanly.
    """
    per_param: dict[str, float] = {}
    worst = 0.0
    worst_name = ""
    for name, p in params.items():
        flat = p.data.reshape(-1)
        analytic = p.grad.reshape(-1)
        err = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = f()
            flat[i] = orig - h
            fm = f()
            flat[i] = orig
            numeric = (fp - fm) / (2.0 * h)
            denom = max(abs(analytic[i]), abs(numeric), 1e-6)
            err = max(err, abs(analytic[i] - numeric) / denom)
        per_param[name] = err
        if err > worst:
            worst, worst_name = err, name
    return GradCheckReport(worst, worst_name, per_param, tol)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(path, params: dict[str, Param], meta: dict | None = None) -> None:
    """Write a versioned binary dump of named tensors (deterministic bytes)."""
    tensors = []
    blobs = []
    for name in params:  # insertion order is the contract
        arr = np.ascontiguousarray(params[name].data, dtype=np.float64)
        tensors.append({"name": name, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = json.dumps(
        {"version": CHECKPOINT_VERSION, "tensors": tensors, "meta": meta or {}},
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointError(f"not a checkpoint file: bad magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        out: dict[str, np.ndarray] = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise CheckpointError(f"truncated data for tensor {spec['name']!r}")
            out[spec["name"]] = np.frombuffer(buf, dtype=np.float64).reshape(shape).copy()
    return out, header.get("meta", {})


def load_into(params: dict[str, Param], path) -> dict:
    """Load a checkpoint into an existing parameter dict, rejecting mismatches."""
    arrays, meta = load_checkpoint(path)
    missing = sorted(set(params) - set(arrays))
    extra = sorted(set(arrays) - set(params))
    if missing or extra:
        raise CheckpointError(f"parameter names differ: missing {missing}, extra {extra}")
    for name, p in params.items():
        if arrays[name].shape != p.data.shape:
            raise CheckpointError(
                f"shape mismatch for {name!r}: checkpoint {arrays[name].shape}, "
                f"model {p.data.shape}"
            )
    for name, p in params.items():
        p.data = arrays[name]
        p.grad = np.zeros_like(p.data)
    return meta
