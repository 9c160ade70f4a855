"""The five loss terms and their composition.

Terms (all batch means of per-example cross-entropies):

* joint          CE(joint head on m_inv + m_spc, label)
* specific       CE(domain head on m_spc, domain)
* classification CE(classification head on m_inv, label)
* backdoor       CE(domain-averaged adjusted head mixture, label)
* adjustment     (classification - backdoor)^2, squared at the batch
                 level by default; a per-example variant squares each
                 example's difference first and averages

and the composition

    invariant = classification + alpha * backdoor + beta * adjustment
    all       = joint + invariant + specific

Ablation flags drop the invariant extras (alpha = beta = 0, optionally
also the classification term) or the specific side (joint + specific).
Disabled terms are still computed for reporting, but contribute exactly
zero gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .model import ForwardOut, HeadGradients


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 1.0
    enable_invariant: bool = True
    enable_specific: bool = True
    drop_classification: bool = False
    per_example_adjustment: bool = False

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError(f"alpha/beta must be >= 0, got {self.alpha}, {self.beta}")


@dataclass(frozen=True)
class LossBreakdown:
    joint: float
    specific: float
    classification: float
    backdoor: float
    adjustment: float
    invariant: float
    all: float

    FIELDS = ("joint", "specific", "classification", "backdoor", "adjustment", "invariant", "all")

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in self.FIELDS)

    def nonfinite_terms(self) -> list[str]:
        return [f for f in self.FIELDS if not np.isfinite(getattr(self, f))]


def _ce_vectors(out: ForwardOut, labels, domains, counter: nn.ClampCounter | None):
    labels = np.asarray(labels, dtype=np.int64)
    lj, _, back_j = nn.softmax_ce(out.logits_joint, labels)
    lc, _, back_c = nn.softmax_ce(out.logits_classification, labels)
    lb, back_b = nn.ce_on_probs(out.probs_backdoor_mixture, labels, counter)
    if domains is not None:
        ls, _, back_s = nn.softmax_ce(out.logits_specific, np.asarray(domains, dtype=np.int64))
    else:
        ls, back_s = np.zeros_like(lj), None
    return (lj, back_j), (lc, back_c), (lb, back_b), (ls, back_s)


def loss_joint(out: ForwardOut, labels) -> float:
    losses, _, _ = nn.softmax_ce(out.logits_joint, np.asarray(labels, dtype=np.int64))
    return float(losses.mean())


def loss_specific(out: ForwardOut, domains) -> float:
    losses, _, _ = nn.softmax_ce(out.logits_specific, np.asarray(domains, dtype=np.int64))
    return float(losses.mean())


def loss_classification(out: ForwardOut, labels) -> float:
    losses, _, _ = nn.softmax_ce(out.logits_classification, np.asarray(labels, dtype=np.int64))
    return float(losses.mean())


def loss_backdoor(out: ForwardOut, labels) -> float:
    losses, _ = nn.ce_on_probs(out.probs_backdoor_mixture, np.asarray(labels, dtype=np.int64))
    return float(losses.mean())


def loss_adjustment(out: ForwardOut, labels, per_example: bool = False) -> float:
    labels = np.asarray(labels, dtype=np.int64)
    lc, _, _ = nn.softmax_ce(out.logits_classification, labels)
    lb, _ = nn.ce_on_probs(out.probs_backdoor_mixture, labels)
    if per_example:
        return float(((lc - lb) ** 2).mean())
    return float((lc.mean() - lb.mean()) ** 2)


def loss_invariant(out: ForwardOut, labels, weights: LossWeights) -> float:
    c = loss_classification(out, labels)
    b = loss_backdoor(out, labels)
    a = loss_adjustment(out, labels, weights.per_example_adjustment)
    c_flag = 0.0 if weights.drop_classification else 1.0
    alpha, beta = (weights.alpha, weights.beta) if weights.enable_invariant else (0.0, 0.0)
    return c_flag * c + alpha * b + beta * a


def loss_all(
    out: ForwardOut,
    labels,
    domains,
    weights: LossWeights,
    clamp_counter: nn.ClampCounter | None = None,
) -> tuple[LossBreakdown, HeadGradients]:
    """All loss terms plus head-level gradients of the enabled composition."""
    n = out.logits_joint.shape[0]
    (lj, back_j), (lc, back_c), (lb, back_b), (ls, back_s) = _ce_vectors(
        out, labels, domains, clamp_counter
    )
    joint = float(lj.mean())
    classification = float(lc.mean())
    backdoor = float(lb.mean())
    specific = float(ls.mean())

    diff = lc - lb
    if weights.per_example_adjustment:
        adjustment = float((diff**2).mean())
    else:
        adjustment = float((classification - backdoor) ** 2)

    c_flag = 0.0 if weights.drop_classification else 1.0
    alpha, beta = (weights.alpha, weights.beta) if weights.enable_invariant else (0.0, 0.0)
    invariant = c_flag * classification + alpha * backdoor + beta * adjustment
    total = invariant + ((joint + specific) if weights.enable_specific else 0.0)

    # Per-example weights for each CE's gradient. The adjustment square
    # contributes 2*beta*delta through both component losses with opposite
    # signs; delta is the batch scalar or the per-example difference.
    delta = diff if weights.per_example_adjustment else (classification - backdoor)
    w_cls = np.full(n, c_flag / n) + (2.0 * beta / n) * delta
    w_back = np.full(n, alpha / n) - (2.0 * beta / n) * delta
    side = (1.0 / n) if weights.enable_specific else 0.0

    grads = HeadGradients(
        classification=back_c(w_cls),
        joint=back_j(np.full(n, side)),
        specific=(
            back_s(np.full(n, side))
            if back_s is not None
            else np.zeros_like(out.logits_specific)
        ),
        mixture=back_b(w_back),
    )
    breakdown = LossBreakdown(
        joint=joint,
        specific=specific,
        classification=classification,
        backdoor=backdoor,
        adjustment=adjustment,
        invariant=invariant,
        all=total,
    )
    return breakdown, grads
