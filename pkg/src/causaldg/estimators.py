"""sklearn-style estimators wrapping the training core.

``DisentangledSentimentClassifier`` is the full architecture with the
five-term objective; ``ERMClassifier`` is the plain encoder + single
head baseline, optionally with a risk-variance penalty across training
domains (``penalty_weight`` > 0); ``LinearProbe`` is a softmax probe for
representation analysis. All follow the sklearn contract: constructor
stores hyperparameters verbatim, ``fit`` validates and learns, fitted
state lives in trailing-underscore attributes, so ``clone`` and
``get_params``/``set_params`` work as usual.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from . import losses, model, nn, seeding, training
from .validation import ArrayData, InputError, as_array_data, check_domains, stratified_split_indices

MODEL_FILE = "checkpoint.bin"
CONFIG_FILE = "estimator.json"


def _split_for_fit(data: ArrayData, val_fraction: float, seed: int):
    rng = seeding.rng(seed, seeding.K_SPLIT)
    train_idx, val_idx = stratified_split_indices(data.labels, data.domains, val_fraction, rng)
    return data.take(train_idx), data.take(val_idx)


class DisentangledSentimentClassifier(BaseEstimator, ClassifierMixin):
    """Invariant/specific disentangling classifier with the adjusted-mixture
    objective.

    Parameters mirror the training configuration; ``alpha`` weights the
    mixture cross-entropy and ``beta`` the squared alignment between the
    invariant-head loss and the mixture loss. ``enable_invariant`` /
    ``enable_specific`` are the ablation switches. ``transform`` exposes
    the learned representations (``transform_rep`` one of h, m_inv,
    m_spc, joint).
    """

    def __init__(
        self,
        embed_dim=32,
        hidden_dim=64,
        rep_dim=32,
        domain_embed_dim=16,
        alpha=1.0,
        beta=1.0,
        enable_invariant=True,
        enable_specific=True,
        drop_classification=False,
        per_example_adjustment=False,
        lr=training.LR_PRESETS["scratch"],
        batch_size=16,
        epochs=20,
        patience=5,
        val_fraction=0.2,
        vocab_size=None,
        transform_rep="m_inv",
        seed=0,
    ):
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.rep_dim = rep_dim
        self.domain_embed_dim = domain_embed_dim
        self.alpha = alpha
        self.beta = beta
        self.enable_invariant = enable_invariant
        self.enable_specific = enable_specific
        self.drop_classification = drop_classification
        self.per_example_adjustment = per_example_adjustment
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.val_fraction = val_fraction
        self.vocab_size = vocab_size
        self.transform_rep = transform_rep
        self.seed = seed

    def _weights(self) -> losses.LossWeights:
        return losses.LossWeights(
            alpha=self.alpha,
            beta=self.beta,
            enable_invariant=self.enable_invariant,
            enable_specific=self.enable_specific,
            drop_classification=self.drop_classification,
            per_example_adjustment=self.per_example_adjustment,
        )

    def fit(self, X, y, domains=None):
        if domains is None:
            raise InputError("fit requires domain indices (domains=...)")
        data, vocab, feat_dim = as_array_data(X, y, domains, vocab_size=self.vocab_size)
        _, num_domains = check_domains(domains, len(data))
        model_cfg = model.ModelConfig(
            num_domains=num_domains,
            vocab_size=vocab,
            feature_dim=feat_dim,
            embed_dim=self.embed_dim,
            hidden_dim=self.hidden_dim,
            rep_dim=self.rep_dim,
            domain_embed_dim=self.domain_embed_dim,
            seed=seeding.child_seed(self.seed, seeding.K_MODEL_INIT),
        )
        cfg = training.TrainConfig(
            model=model_cfg,
            weights=self._weights(),
            lr=self.lr,
            batch_size=self.batch_size,
            epochs=self.epochs,
            patience=self.patience,
            seed=self.seed,
        )
        train_data, val_data = _split_for_fit(data, self.val_fraction, self.seed)
        result = training.train(cfg, train_data, val_data)
        self.config_ = model_cfg
        self.params_ = result.params
        self.result_ = result
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.best_val_accuracy_ = result.best_val_accuracy
        self.head_ = result.head
        self.n_domains_ = num_domains
        self.classes_ = np.array([0, 1])
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise InputError("estimator is not fitted; call fit first")

    def _data(self, X) -> ArrayData:
        self._check_fitted()
        vocab = self.config_.vocab_size
        data, _, feat_dim = as_array_data(
            X, np.zeros(_n_examples(X), dtype=np.int64), None, vocab_size=vocab
        )
        if (feat_dim is None) != (self.config_.feature_dim is None):
            raise InputError("input mode (tokens vs features) differs from fit")
        return data

    def predict_proba(self, X) -> np.ndarray:
        data = self._data(X)
        _, probs = model.predict(self.params_, self.config_, data.batch(), head=self.head_)
        return probs

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return (probs[:, 1] > probs[:, 0]).astype(np.int64)

    def transform(self, X) -> np.ndarray:
        data = self._data(X)
        out, _ = model.forward(self.params_, self.config_, data.batch())
        reps = {
            "h": out.h,
            "m_inv": out.m_inv,
            "m_spc": out.m_spc,
            "joint": out.m_inv + out.m_spc,
        }
        try:
            return reps[self.transform_rep]
        except KeyError:
            raise InputError(
                f"transform_rep {self.transform_rep!r} not one of {sorted(reps)}"
            ) from None

    def representations(self, X) -> dict[str, np.ndarray]:
        data = self._data(X)
        out, _ = model.forward(self.params_, self.config_, data.batch())
        return {"h": out.h, "m_inv": out.m_inv, "m_spc": out.m_spc,
                "joint": out.m_inv + out.m_spc}

    def parameter_count(self) -> int:
        self._check_fitted()
        return model.parameter_count(self.params_)


class ERMClassifier(BaseEstimator, ClassifierMixin):
    """Encoder + one linear head, pooled cross-entropy.

    With ``penalty_weight`` > 0 the per-batch variance of per-domain mean
    risks is added to the loss (risk extrapolation style); at 0 the
    trajectory is bit-identical to plain pooled training.
    """

    def __init__(
        self,
        embed_dim=32,
        lr=training.LR_PRESETS["scratch"],
        batch_size=16,
        epochs=20,
        patience=5,
        val_fraction=0.2,
        penalty_weight=0.0,
        vocab_size=None,
        seed=0,
    ):
        self.embed_dim = embed_dim
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.val_fraction = val_fraction
        self.penalty_weight = penalty_weight
        self.vocab_size = vocab_size
        self.seed = seed

    def _build_params(self, vocab, feat_dim, seed):
        rng = seeding.rng(seed, seeding.K_MODEL_INIT)
        params: dict[str, nn.Param] = {}
        input_dim = self.embed_dim if vocab is not None else feat_dim

        def xavier(fan_in, fan_out):
            a = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-a, a, size=(fan_in, fan_out))

        if vocab is not None:
            params["embed"] = nn.Param(xavier(vocab, self.embed_dim))
        params["pool_w"] = nn.Param(xavier(input_dim, self.embed_dim))
        params["pool_b"] = nn.Param(np.zeros(self.embed_dim))
        params["head_w"] = nn.Param(xavier(self.embed_dim, 2))
        params["head_b"] = nn.Param(np.zeros(2))
        return params

    def _forward(self, params, data: ArrayData, idx):
        if data.ids is not None:
            rows, back_emb = nn.embedding(params["embed"], data.ids[idx])
            pooled, back_pool = nn.mean_pool(rows, data.mask[idx])
        else:
            pooled, back_emb, back_pool = data.features[idx], None, None
        z, back_proj = nn.linear(pooled, params["pool_w"], params["pool_b"])
        h, back_tanh = nn.tanh_act(z)
        logits, back_head = nn.linear(h, params["head_w"], params["head_b"])

        def backward(g_logits):
            g_pooled = back_proj(back_tanh(back_head(g_logits)))
            if back_emb is not None:
                back_emb(back_pool(g_pooled))

        return logits, backward

    def fit(self, X, y, domains=None):
        data, vocab, feat_dim = as_array_data(X, y, domains, vocab_size=self.vocab_size)
        if self.penalty_weight > 0 and data.domains is None:
            raise InputError("penalty_weight > 0 requires domain indices")
        train_data, val_data = _split_for_fit(data, self.val_fraction, self.seed)
        params = self._build_params(vocab, feat_dim, seeding.child_seed(self.seed, seeding.K_MODEL_INIT))
        state = nn.AdamState.for_params(params)
        shuffle_rng = seeding.rng(self.seed, seeding.K_SHUFFLE)

        best_acc, best_epoch, since_best = -1.0, -1, 0
        best_params: dict[str, nn.Param] = {}
        risk_history: list[float] = []
        n = len(train_data)
        if self.epochs < 1:
            raise training.TrainConfigError(f"epochs={self.epochs} must be >= 1")
        for epoch in range(self.epochs):
            order = shuffle_rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                logits, backward = self._forward(params, train_data, idx)
                labels = train_data.labels[idx]
                ce, _, back_ce = nn.softmax_ce(logits, labels)
                b = len(idx)
                weights = np.full(b, 1.0 / b)
                if self.penalty_weight > 0:
                    doms = train_data.domains[idx]
                    present = np.unique(doms)
                    risks = np.array([ce[doms == d].mean() for d in present])
                    mean_risk = risks.mean()
                    # d/d r_e of mean((r - rbar)^2) is 2 (r_e - rbar) / E
                    coef = 2.0 * (risks - mean_risk) / len(present)
                    for d, c in zip(present, coef):
                        sel = doms == d
                        weights[sel] += self.penalty_weight * c / sel.sum()
                if not np.isfinite(ce).all():
                    raise training.NonFiniteLossError(epoch, ["classification"])
                backward(back_ce(weights))
                nn.adam_step(params, state, self.lr)
                nn.zero_grads(params)
                risk_history.append(float(ce.mean()))
            val_logits, _ = self._forward(params, val_data, slice(None))
            pred = (val_logits[:, 1] > val_logits[:, 0]).astype(np.int64)
            acc = float(np.mean(pred == val_data.labels))
            if acc > best_acc:
                best_acc, best_epoch, since_best = acc, epoch, 0
                best_params = {k: p.copy() for k, p in params.items()}
            else:
                since_best += 1
                if since_best > self.patience:
                    break

        self.params_ = best_params
        self.vocab_size_ = vocab
        self.feature_dim_ = feat_dim
        self.best_epoch_ = best_epoch
        self.best_val_accuracy_ = best_acc
        self.risk_history_ = risk_history
        self.classes_ = np.array([0, 1])
        return self

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.params_.values())

    def predict_proba(self, X) -> np.ndarray:
        if not hasattr(self, "params_"):
            raise InputError("estimator is not fitted; call fit first")
        data, _, feat_dim = as_array_data(
            X, np.zeros(_n_examples(X), dtype=np.int64), None, vocab_size=self.vocab_size_
        )
        if (feat_dim is None) != (self.feature_dim_ is None):
            raise InputError("input mode (tokens vs features) differs from fit")
        logits, _ = self._forward(self.params_, data, slice(None))
        return nn.softmax(logits)

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return (probs[:, 1] > probs[:, 0]).astype(np.int64)


class LinearProbe(BaseEstimator, ClassifierMixin):
    """Multinomial logistic probe for frozen representations.

    Full-batch Adam with a fixed budget (200 epochs, lr 1e-2) so probe
    capacity and optimization never confound representation comparisons.
    """

    def __init__(self, epochs=200, lr=1e-2, seed=0):
        self.epochs = epochs
        self.lr = lr
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise InputError(f"probe input must be 2-D, got shape {X.shape}")
        y = np.asarray(y, dtype=np.int64)
        classes = np.unique(y)
        n_classes = int(classes.max()) + 1
        rng = seeding.rng(self.seed, seeding.K_PROBE)
        a = np.sqrt(6.0 / (X.shape[1] + n_classes))
        params = {
            "w": nn.Param(rng.uniform(-a, a, size=(X.shape[1], n_classes))),
            "b": nn.Param(np.zeros(n_classes)),
        }
        state = nn.AdamState.for_params(params)
        n = len(y)
        for _ in range(self.epochs):
            logits, back = nn.linear(X, params["w"], params["b"])
            _, _, back_ce = nn.softmax_ce(logits, y)
            back(back_ce(np.full(n, 1.0 / n)))
            nn.adam_step(params, state, self.lr)
            nn.zero_grads(params)
        self.params_ = params
        self.classes_ = classes
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        return X @ self.params_["w"].data + self.params_["b"].data

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X).argmax(axis=1)

    def predict_proba(self, X) -> np.ndarray:
        return nn.softmax(self.decision_function(X))


def _n_examples(X) -> int:
    return len(X)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_model(est: DisentangledSentimentClassifier, out_dir) -> None:
    """Checkpoint + config for a fitted disentangling classifier."""
    est._check_fitted()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = est.config_
    meta = {
        "model_config": {
            "num_domains": cfg.num_domains,
            "vocab_size": cfg.vocab_size,
            "feature_dim": cfg.feature_dim,
            "embed_dim": cfg.embed_dim,
            "hidden_dim": cfg.hidden_dim,
            "rep_dim": cfg.rep_dim,
            "domain_embed_dim": cfg.domain_embed_dim,
            "num_classes": cfg.num_classes,
            "seed": cfg.seed,
        },
        "head": est.head_,
    }
    nn.save_checkpoint(out / MODEL_FILE, est.params_, meta=meta)
    payload = {
        "estimator_params": est.get_params(),
        "best_epoch": est.best_epoch_,
        "best_val_accuracy": est.best_val_accuracy_,
        "n_domains": est.n_domains_,
    }
    (out / CONFIG_FILE).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_model(model_dir) -> DisentangledSentimentClassifier:
    root = Path(model_dir)
    payload = json.loads((root / CONFIG_FILE).read_text())
    est = DisentangledSentimentClassifier(**payload["estimator_params"])
    arrays, meta = nn.load_checkpoint(root / MODEL_FILE)
    cfg = model.ModelConfig(**meta["model_config"])
    params = model.build_params(cfg)
    expected = {k: p.data.shape for k, p in params.items()}
    for name, arr in arrays.items():
        if name not in expected:
            raise nn.CheckpointError(f"unexpected tensor {name!r} in checkpoint")
        if arr.shape != expected[name]:
            raise nn.CheckpointError(
                f"shape mismatch for {name!r}: {arr.shape} vs {expected[name]}"
            )
        params[name].data = arr
        params[name].grad = np.zeros_like(arr)
    est.config_ = cfg
    est.params_ = params
    est.head_ = meta["head"]
    est.best_epoch_ = payload["best_epoch"]
    est.best_val_accuracy_ = payload["best_val_accuracy"]
    est.n_domains_ = payload["n_domains"]
    est.classes_ = np.array([0, 1])
    return est
