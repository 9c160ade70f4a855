"""Disentangling classifier: shared encoder, invariant/specific branches.

The pipeline is fixed: token embedding + masked mean pool (or a dense
feature vector) -> linear+tanh encoder output ``h`` -> two disjoint
3-layer ReLU MLPs producing ``m_inv`` and ``m_spc`` -> four heads:

* classification head on m_inv (the invariant path),
* joint head on m_inv + m_spc (elementwise sum; the inference path),
* domain head on m_spc,
* adjusted head on m_inv concatenated with a learnable per-domain
  embedding, averaged over all domains with equal weight 1/|D| to form
  the back-door mixture distribution.

``forward`` returns every intermediate plus a backward closure that
takes head-level gradients and accumulates parameter gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn, seeding


@dataclass(frozen=True)
class ModelConfig:
    num_domains: int
    vocab_size: int | None = None
    feature_dim: int | None = None
    embed_dim: int = 32
    hidden_dim: int = 64
    rep_dim: int = 32
    domain_embed_dim: int = 16
    num_classes: int = 2
    seed: int = 0

    def __post_init__(self):
        if (self.vocab_size is None) == (self.feature_dim is None):
            raise nn.NNError("set exactly one of vocab_size (token mode) or feature_dim")
        for name in ("num_domains", "embed_dim", "hidden_dim", "rep_dim", "domain_embed_dim"):
            if getattr(self, name) < 1:
                raise nn.NNError(f"{name} must be >= 1")
        if self.num_classes != 2:
            raise nn.NNError("this classifier is binary; num_classes must be 2")

    @property
    def input_dim(self) -> int:
        return self.embed_dim if self.vocab_size is not None else self.feature_dim


@dataclass(frozen=True)
class Batch:
    """Either padded token ids with a validity mask, or dense features."""

    ids: np.ndarray | None = None
    mask: np.ndarray | None = None
    features: np.ndarray | None = None

    def __len__(self) -> int:
        ref = self.ids if self.ids is not None else self.features
        return ref.shape[0]


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=(fan_in, fan_out))


def build_params(cfg: ModelConfig) -> dict[str, nn.Param]:
    """Initialize all parameters in a fixed, documented order.

    Weight matrices are Xavier-uniform, biases zero, domain embeddings
    normal(0, 0.1), all drawn from one seeded stream, so the checkpoint is
    a pure function of the config.
    """
    rng = seeding.rng(cfg.seed, seeding.K_MODEL_INIT)
    params: dict[str, nn.Param] = {}

    def weight(name, fan_in, fan_out):
        params[name] = nn.Param(_xavier(rng, fan_in, fan_out))
        params[name.replace("_w", "_b", 1) if "_w" in name else name + "_b"] = nn.Param(
            np.zeros(fan_out)
        )

    if cfg.vocab_size is not None:
        params["embed"] = nn.Param(_xavier(rng, cfg.vocab_size, cfg.embed_dim))
    weight("pool_w", cfg.input_dim, cfg.embed_dim)
    for branch in ("inv", "spc"):
        weight(f"{branch}_w1", cfg.embed_dim, cfg.hidden_dim)
        weight(f"{branch}_w2", cfg.hidden_dim, cfg.hidden_dim)
        weight(f"{branch}_w3", cfg.hidden_dim, cfg.rep_dim)
    weight("cls_w", cfg.rep_dim, cfg.num_classes)
    weight("joint_w", cfg.rep_dim, cfg.num_classes)
    weight("dom_w", cfg.rep_dim, cfg.num_domains)
    weight("back_w", cfg.rep_dim + cfg.domain_embed_dim, cfg.num_classes)
    params["domain_embed"] = nn.Param(rng.normal(0.0, 0.1, size=(cfg.num_domains, cfg.domain_embed_dim)))
    return params


def parameter_count(params: dict[str, nn.Param]) -> int:
    return sum(p.data.size for p in params.values())


@dataclass
class ForwardOut:
    h: np.ndarray
    m_inv: np.ndarray
    m_spc: np.ndarray
    logits_classification: np.ndarray
    probs_classification: np.ndarray
    logits_joint: np.ndarray
    probs_joint: np.ndarray
    logits_specific: np.ndarray
    probs_specific: np.ndarray
    domain_head_probs: np.ndarray  # (num_domains, batch, classes)
    probs_backdoor_mixture: np.ndarray


@dataclass(frozen=True)
class HeadGradients:
    """Upstream gradients per head, already weighted per example."""

    classification: np.ndarray  # d loss / d logits_classification
    joint: np.ndarray
    specific: np.ndarray
    mixture: np.ndarray  # d loss / d probs_backdoor_mixture


def _mlp3(h, params, branch):
    z1, back1 = nn.linear(h, params[f"{branch}_w1"], params[f"{branch}_b1"])
    a1, backr1 = nn.relu(z1)
    z2, back2 = nn.linear(a1, params[f"{branch}_w2"], params[f"{branch}_b2"])
    a2, backr2 = nn.relu(z2)
    out, back3 = nn.linear(a2, params[f"{branch}_w3"], params[f"{branch}_b3"])

    def backward(grad):
        return back1(backr1(back2(backr2(back3(grad)))))

    return out, backward


def forward(params: dict[str, nn.Param], cfg: ModelConfig, batch: Batch):
    """Run the full pipeline; returns (ForwardOut, backward).

    ``backward(HeadGradients)`` accumulates gradients on every parameter.
    """
    if len(batch) == 0:
        raise nn.NNError("empty batch")
    if cfg.vocab_size is not None:
        if batch.ids is None:
            raise nn.NNError("token-mode model needs Batch.ids")
        rows, back_emb = nn.embedding(params["embed"], batch.ids)
        pooled, back_pool = nn.mean_pool(rows, batch.mask)
    else:
        if batch.features is None:
            raise nn.NNError("feature-mode model needs Batch.features")
        pooled, back_emb, back_pool = np.asarray(batch.features, dtype=np.float64), None, None
    z_pool, back_proj = nn.linear(pooled, params["pool_w"], params["pool_b"])
    h, back_tanh = nn.tanh_act(z_pool)

    m_inv, back_inv = _mlp3(h, params, "inv")
    m_spc, back_spc = _mlp3(h, params, "spc")

    logits_cls, back_cls = nn.linear(m_inv, params["cls_w"], params["cls_b"])
    logits_joint, back_joint = nn.linear(m_inv + m_spc, params["joint_w"], params["joint_b"])
    logits_dom, back_dom = nn.linear(m_spc, params["dom_w"], params["dom_b"])

    n_dom = cfg.num_domains
    batch_size = len(batch)
    embed_d = params["domain_embed"]
    domain_probs = np.empty((n_dom, batch_size, cfg.num_classes))
    back_heads = []
    for d in range(n_dom):
        e_d = np.broadcast_to(embed_d.data[d], (batch_size, cfg.domain_embed_dim))
        z_d = np.concatenate([m_inv, e_d], axis=1)
        logits_d, back_d = nn.linear(z_d, params["back_w"], params["back_b"])
        domain_probs[d] = nn.softmax(logits_d)
        back_heads.append(back_d)
    mixture = domain_probs.mean(axis=0)

    out = ForwardOut(
        h=h,
        m_inv=m_inv,
        m_spc=m_spc,
        logits_classification=logits_cls,
        probs_classification=nn.softmax(logits_cls),
        logits_joint=logits_joint,
        probs_joint=nn.softmax(logits_joint),
        logits_specific=logits_dom,
        probs_specific=nn.softmax(logits_dom),
        domain_head_probs=domain_probs,
        probs_backdoor_mixture=mixture,
    )

    rep_dim = cfg.rep_dim

    def backward(grads: HeadGradients) -> None:
        g_minv = back_cls(grads.classification)
        g_sum = back_joint(grads.joint)
        g_minv = g_minv + g_sum
        g_mspc = g_sum + back_dom(grads.specific)
        for d in range(n_dom):
            g_probs_d = grads.mixture / n_dom
            p = domain_probs[d]
            # softmax Jacobian: p * (g - <g, p>)
            g_logits_d = p * (g_probs_d - (g_probs_d * p).sum(axis=1, keepdims=True))
            g_z = back_heads[d](g_logits_d)
            g_minv = g_minv + g_z[:, :rep_dim]
            embed_d.grad[d] += g_z[:, rep_dim:].sum(axis=0)
        g_h = back_inv(g_minv) + back_spc(g_mspc)
        g_pooled = back_proj(back_tanh(g_h))
        if back_emb is not None:
            back_emb(back_pool(g_pooled))

    return out, backward


def encode(params: dict[str, nn.Param], cfg: ModelConfig, batch: Batch) -> np.ndarray:
    """Encoder output ``h`` only (no gradients kept)."""
    out, _ = forward(params, cfg, batch)
    return out.h


def predict(params: dict[str, nn.Param], cfg: ModelConfig, batch: Batch, head: str = "joint"):
    """Labels and class probabilities from the chosen head.

    Ties break toward class 0 (strict > comparison).
    """
    out, _ = forward(params, cfg, batch)
    probs = {"joint": out.probs_joint, "classification": out.probs_classification}[head]
    labels = (probs[:, 1] > probs[:, 0]).astype(np.int64)
    return labels, probs
