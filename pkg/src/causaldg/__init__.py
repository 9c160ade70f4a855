"""Causal-adjustment domain generalization at desk scale.

An exact discrete SCM engine for verifying back-door adjustment claims,
a synthetic confounded multi-domain text generator, a small handwritten
neural stack, the disentangling classifier with its five-term loss, and
leave-one-domain-out evaluation tooling.
"""

__version__ = "0.1.0"

from . import datagen, evaluation, losses, model, nn, scm, seeding, training, validation  # noqa: F401
from .estimators import (  # noqa: F401
    DisentangledSentimentClassifier,
    ERMClassifier,
    LinearProbe,
    load_model,
    save_model,
)
