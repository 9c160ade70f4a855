"""Synthetic confounded multi-domain sentiment data.

Each example is a fixed-length token sequence assembled from typed slots:

* invariant slots: tokens from a positive or negative sentiment pool;
  the pool agrees with the label with probability ``invariant_strength``
  in every domain (the stable, transferable signal),
* ambiguous slots: tokens whose polarity is domain-local. Token t in
  domain d carries sign ``ambiguity_sign[d][t]``; the emitted token's
  sign agrees with the label with probability ``ambiguous_strength``.
  Because the sign table varies across domains, these tokens are highly
  predictive inside a domain and misleading in a domain with flipped
  signs,
* marker slots: tokens owned by the example's domain (pure domain
  identity),
* a polarity-flip slot: with probability ``negation_prob`` the example
  carries a negation token and every invariant slot aims at the
  opposite label. Reading the invariant signal then requires the
  conjunction (invariant polarity XOR negation), which a linear
  unigram model cannot represent in any domain,
* neutral slots: uniform filler.

Slot positions are shuffled per example. The label prior per domain is
shifted by ``confound_strength`` so the domain confounds the label, and
positives are emitted by exact quota, so the empirical per-domain rate
matches the configured prior to rounding.

Every sampling probability is available in closed form
(``token_distribution``), which makes two oracles possible: a unigram
Bayes classifier built from the generator's own distributions, and an
exact projection of the generator onto a small discrete SCM
(``oracle_scm``) for back-door analysis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import seeding
from .scm import ScmSpec

POOL_INV_POS = "inv_pos"
POOL_INV_NEG = "inv_neg"
POOL_AMBIGUOUS = "ambiguous"
POOL_MARKER = "marker"
POOL_NEGATION = "negation"
POOL_NEUTRAL = "neutral"
POOLS = (POOL_INV_POS, POOL_INV_NEG, POOL_AMBIGUOUS, POOL_MARKER, POOL_NEGATION, POOL_NEUTRAL)

# How far confound_strength=1 moves the per-domain positive rate off balance.
PRIOR_SHIFT = 0.4
PRIOR_CLIP = (0.05, 0.95)


class GenConfigError(ValueError):
    """Invalid generator configuration; collects every field error."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid generator config: " + "; ".join(problems))


class DataFormatError(ValueError):
    """Malformed dataset file."""


@dataclass(frozen=True)
class GenConfig:
    num_domains: int = 4
    examples_per_domain: int = 2000
    seq_len: int = 12
    n_invariant_pos: int = 6
    n_invariant_neg: int = 6
    n_ambiguous: int = 6
    n_marker: int = 8
    n_negation: int = 2
    n_neutral: int = 24
    k_invariant: int = 3
    k_ambiguous: int = 3
    k_marker: int = 2
    invariant_strength: float = 0.8
    ambiguous_strength: float = 0.95
    negation_prob: float = 0.0
    confound_strength: float = 0.0
    label_balance: float = 0.5
    ambiguity_sign: tuple[tuple[int, ...], ...] | None = None
    raw_features: bool = False
    seed: int = 0

    def domain_label_prior(self, d: int) -> float:
        """Positive-label probability in domain d (the confounded prior)."""
        direction = 1.0 if d % 2 == 0 else -1.0
        p = self.label_balance + self.confound_strength * PRIOR_SHIFT * direction
        return float(min(max(p, PRIOR_CLIP[0]), PRIOR_CLIP[1]))

    def effective_invariant_agreement(self) -> float:
        """Marginal probability that an invariant slot shows the label's
        polarity, once negation flips are averaged out."""
        s, f = self.invariant_strength, self.negation_prob
        return (1.0 - f) * s + f * (1.0 - s)

    def resolved_sign(self) -> np.ndarray:
        """The (num_domains, n_ambiguous) sign table, +1/-1 entries."""
        if self.ambiguity_sign is not None:
            return np.asarray(self.ambiguity_sign, dtype=np.int64)
        return default_sign_table(self.num_domains, self.n_ambiguous)


def default_sign_table(num_domains: int, n_ambiguous: int) -> np.ndarray:
    """Rotated half-positive sign pattern.

    For an even number of domains every token's column holds exactly half
    +1 entries, so the majority polarity across any ``num_domains - 1``
    training domains disagrees with the held-out domain's polarity: the
    most adversarial layout for a pooled learner.
    """
    period = num_domains if num_domains % 2 == 0 and num_domains >= 2 else num_domains + 1
    d = np.arange(num_domains)[:, None]
    t = np.arange(n_ambiguous)[None, :]
    return np.where((d + t) % period < period // 2, 1, -1).astype(np.int64)


def hard_preset(num_domains: int = 4, examples_per_domain: int = 2000, seed: int = 0,
                **overrides) -> GenConfig:
    """The adversarial benchmark preset.

    Ambiguous tokens carry a polarity that flips in every held-out
    domain, the label prior is confounded by the domain, and the
    invariant signal is gated by negation, so a pooled unigram learner
    leans on the ambiguous tokens and pays for it out of domain.
    """
    if num_domains % 2 != 0 or num_domains < 2:
        raise GenConfigError(["hard preset needs an even number of domains >= 2"])
    cfg = GenConfig(
        num_domains=num_domains,
        examples_per_domain=examples_per_domain,
        invariant_strength=0.9,
        ambiguous_strength=0.9,
        negation_prob=0.3,
        k_marker=1,
        confound_strength=0.3,
        seed=seed,
    )
    return replace(cfg, **overrides) if overrides else cfg


def validate_config(cfg: GenConfig) -> None:
    """Raise ``GenConfigError`` listing every violated field at once."""
    p: list[str] = []
    if cfg.num_domains < 1:
        p.append(f"num_domains={cfg.num_domains} (need >= 1)")
    if cfg.examples_per_domain < 1:
        p.append(f"examples_per_domain={cfg.examples_per_domain} (need >= 1)")
    if cfg.seq_len < 3:
        p.append(f"seq_len={cfg.seq_len} (need >= 3)")
    for name in ("n_invariant_pos", "n_invariant_neg", "n_ambiguous", "n_marker",
                 "n_negation", "n_neutral"):
        if getattr(cfg, name) < 1:
            p.append(f"{name}={getattr(cfg, name)} (need >= 1)")
    for name in ("k_invariant", "k_ambiguous", "k_marker"):
        if getattr(cfg, name) < 0:
            p.append(f"{name}={getattr(cfg, name)} (need >= 0)")
    slots = cfg.k_invariant + cfg.k_ambiguous + cfg.k_marker + 1  # +1 flip slot
    if cfg.seq_len < slots:
        p.append(f"seq_len={cfg.seq_len} smaller than typed slots ({slots})")
    for name in ("invariant_strength", "ambiguous_strength", "negation_prob",
                 "confound_strength", "label_balance"):
        v = getattr(cfg, name)
        if not 0.0 <= v <= 1.0:
            p.append(f"{name}={v} (need within [0, 1])")
    if cfg.num_domains >= 1 and cfg.n_marker < cfg.num_domains:
        p.append(f"n_marker={cfg.n_marker} smaller than num_domains={cfg.num_domains}")
    if cfg.ambiguity_sign is not None:
        sign = np.asarray(cfg.ambiguity_sign)
        if sign.shape != (cfg.num_domains, cfg.n_ambiguous):
            p.append(
                f"ambiguity_sign shape {sign.shape} != ({cfg.num_domains}, {cfg.n_ambiguous})"
            )
        elif not np.all(np.isin(sign, (-1, 1))):
            p.append("ambiguity_sign entries must be +1 or -1")
    if not p:
        sign = cfg.resolved_sign()
        for d in range(cfg.num_domains):
            if not ((sign[d] == 1).any() and (sign[d] == -1).any()):
                p.append(f"domain {d} has single-signed ambiguous pool; supply ambiguity_sign")
    if p:
        raise GenConfigError(p)


# ---------------------------------------------------------------------------
# Vocabulary and examples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    pools: tuple[str, ...]  # pool tag per token id
    domains: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "_ids", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        try:
            return self._ids[token]
        except KeyError:
            raise DataFormatError(f"unknown token {token!r}") from None

    def ids_in_pool(self, pool: str) -> np.ndarray:
        return np.array([i for i, p in enumerate(self.pools) if p == pool], dtype=np.int64)

    def domain_index(self, name: str) -> int:
        try:
            return self.domains.index(name)
        except ValueError:
            raise DataFormatError(
                f"unknown domain {name!r}; known domains: {list(self.domains)}"
            ) from None


def build_vocabulary(cfg: GenConfig) -> Vocabulary:
    tokens: list[str] = []
    pools: list[str] = []
    for pool, count, stem in (
        (POOL_INV_POS, cfg.n_invariant_pos, "pos"),
        (POOL_INV_NEG, cfg.n_invariant_neg, "neg"),
        (POOL_AMBIGUOUS, cfg.n_ambiguous, "amb"),
        (POOL_MARKER, cfg.n_marker, "mark"),
        (POOL_NEGATION, cfg.n_negation, "not"),
        (POOL_NEUTRAL, cfg.n_neutral, "filler"),
    ):
        tokens += [f"{stem}{i}" for i in range(count)]
        pools += [pool] * count
    domains = tuple(f"domain{i}" for i in range(cfg.num_domains))
    return Vocabulary(tuple(tokens), tuple(pools), domains)


@dataclass(frozen=True)
class Example:
    tokens: tuple[int, ...]
    label: int
    domain: int
    features: tuple[float, ...] | None = None


@dataclass
class DatasetBundle:
    by_domain: tuple[tuple[Example, ...], ...]
    vocab: Vocabulary
    config: GenConfig | None = None
    read_counts: dict[int, int] = field(default_factory=dict, compare=False, repr=False)

    @property
    def num_domains(self) -> int:
        return len(self.by_domain)

    def examples_for(self, domain: int) -> tuple[Example, ...]:
        """Counted accessor; evaluation protocols use this exclusively so
        held-out-domain hygiene is checkable."""
        self.read_counts[domain] = self.read_counts.get(domain, 0) + 1
        return self.by_domain[domain]

    def __eq__(self, other):
        return (
            isinstance(other, DatasetBundle)
            and self.by_domain == other.by_domain
            and self.vocab == other.vocab
            and self.config == other.config
        )


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def _marker_ids_for_domain(cfg: GenConfig, vocab: Vocabulary, d: int) -> np.ndarray:
    markers = vocab.ids_in_pool(POOL_MARKER)
    return markers[np.arange(len(markers)) % cfg.num_domains == d]


def _slot_layout(cfg: GenConfig) -> list[str]:
    k_neutral = cfg.seq_len - cfg.k_invariant - cfg.k_ambiguous - cfg.k_marker - 1
    return (
        ["inv"] * cfg.k_invariant
        + ["amb"] * cfg.k_ambiguous
        + ["mark"] * cfg.k_marker
        + ["flip"]
        + ["neut"] * k_neutral
    )


def raw_feature_vector(cfg: GenConfig, vocab: Vocabulary, tokens, domain: int) -> tuple[float, ...]:
    """Bag-of-pool counts: invariant pos/neg, ambiguous by local sign,
    negation count, per-domain marker counts, neutral count."""
    sign = cfg.resolved_sign()
    amb_ids = vocab.ids_in_pool(POOL_AMBIGUOUS)
    amb_pos = {int(t) for t, s in zip(amb_ids, sign[domain]) if s == 1}
    counts = np.zeros(6 + cfg.num_domains)
    marker_owner = {}
    for d in range(cfg.num_domains):
        for t in _marker_ids_for_domain(cfg, vocab, d):
            marker_owner[int(t)] = d
    for t in tokens:
        pool = vocab.pools[t]
        if pool == POOL_INV_POS:
            counts[0] += 1
        elif pool == POOL_INV_NEG:
            counts[1] += 1
        elif pool == POOL_AMBIGUOUS:
            counts[2 if t in amb_pos else 3] += 1
        elif pool == POOL_NEGATION:
            counts[4] += 1
        elif pool == POOL_MARKER:
            counts[5 + marker_owner[t]] += 1
        else:
            counts[5 + cfg.num_domains] += 1
    return tuple(counts.tolist())


def generate(cfg: GenConfig) -> DatasetBundle:
    """Sample the full multi-domain bundle; deterministic in ``cfg.seed``."""
    validate_config(cfg)
    vocab = build_vocabulary(cfg)
    sign = cfg.resolved_sign()
    inv_pos = vocab.ids_in_pool(POOL_INV_POS)
    inv_neg = vocab.ids_in_pool(POOL_INV_NEG)
    amb = vocab.ids_in_pool(POOL_AMBIGUOUS)
    negation = vocab.ids_in_pool(POOL_NEGATION)
    neutral = vocab.ids_in_pool(POOL_NEUTRAL)
    layout = _slot_layout(cfg)

    per_domain: list[tuple[Example, ...]] = []
    for d in range(cfg.num_domains):
        rng = seeding.rng(cfg.seed, seeding.K_DATAGEN_DOMAIN, d)
        n = cfg.examples_per_domain
        n_pos = int(round(n * cfg.domain_label_prior(d)))
        labels = np.array([1] * n_pos + [0] * (n - n_pos), dtype=np.int64)
        rng.shuffle(labels)
        amb_agree = amb[sign[d] == 1], amb[sign[d] == -1]  # indexed by desired sign
        markers = _marker_ids_for_domain(cfg, vocab, d)
        examples: list[Example] = []
        for y in labels:
            flipped = rng.random() < cfg.negation_prob
            inv_target = (1 - y) if flipped else int(y)
            slots: list[int] = []
            for kind in layout:
                if kind == "inv":
                    agree = rng.random() < cfg.invariant_strength
                    pool = (inv_pos if inv_target == 1 else inv_neg) if agree else (
                        inv_neg if inv_target == 1 else inv_pos
                    )
                elif kind == "amb":
                    agree = rng.random() < cfg.ambiguous_strength
                    want_positive = (y == 1) == agree
                    pool = amb_agree[0] if want_positive else amb_agree[1]
                elif kind == "mark":
                    pool = markers
                elif kind == "flip":
                    pool = negation if flipped else neutral
                else:
                    pool = neutral
                slots.append(int(pool[rng.integers(len(pool))]))
            order = rng.permutation(cfg.seq_len)
            tokens = tuple(slots[i] for i in order)
            features = raw_feature_vector(cfg, vocab, tokens, d) if cfg.raw_features else None
            examples.append(Example(tokens=tokens, label=int(y), domain=d, features=features))
        per_domain.append(tuple(examples))
    return DatasetBundle(tuple(per_domain), vocab, cfg)


# ---------------------------------------------------------------------------
# Closed-form sampling distributions and the unigram oracle
# ---------------------------------------------------------------------------


def token_distribution(cfg: GenConfig, y: int, d: int) -> np.ndarray:
    """Exact marginal distribution of a single emitted token position."""
    validate_config(cfg)
    vocab = build_vocabulary(cfg)
    sign = cfg.resolved_sign()
    p = np.zeros(len(vocab))
    a, f = cfg.ambiguous_strength, cfg.negation_prob
    s_eff = cfg.effective_invariant_agreement()
    k_neutral = cfg.seq_len - cfg.k_invariant - cfg.k_ambiguous - cfg.k_marker - 1

    inv_pos = vocab.ids_in_pool(POOL_INV_POS)
    inv_neg = vocab.ids_in_pool(POOL_INV_NEG)
    agree_pool, other_pool = (inv_pos, inv_neg) if y == 1 else (inv_neg, inv_pos)
    w_inv = cfg.k_invariant / cfg.seq_len
    p[agree_pool] += w_inv * s_eff / len(agree_pool)
    p[other_pool] += w_inv * (1 - s_eff) / len(other_pool)

    amb = vocab.ids_in_pool(POOL_AMBIGUOUS)
    amb_pos = amb[sign[d] == 1]
    amb_neg = amb[sign[d] == -1]
    agree_amb, other_amb = (amb_pos, amb_neg) if y == 1 else (amb_neg, amb_pos)
    w_amb = cfg.k_ambiguous / cfg.seq_len
    p[agree_amb] += w_amb * a / len(agree_amb)
    p[other_amb] += w_amb * (1 - a) / len(other_amb)

    markers = _marker_ids_for_domain(cfg, vocab, d)
    p[markers] += (cfg.k_marker / cfg.seq_len) / len(markers)

    negation = vocab.ids_in_pool(POOL_NEGATION)
    p[negation] += (f / cfg.seq_len) / len(negation)

    neutral = vocab.ids_in_pool(POOL_NEUTRAL)
    p[neutral] += ((k_neutral + (1 - f)) / cfg.seq_len) / len(neutral)
    return p


@dataclass(frozen=True)
class UnigramBayes:
    """Naive-Bayes token classifier built from the generator's exact
    distributions pooled over a set of training domains (not from samples)."""

    log_odds: np.ndarray  # per-token log P(t|y=1)/P(t|y=0)
    prior_logit: float

    @classmethod
    def from_config(cls, cfg: GenConfig, domains) -> "UnigramBayes":
        domains = list(domains)
        p1 = np.mean([token_distribution(cfg, 1, d) for d in domains], axis=0)
        p0 = np.mean([token_distribution(cfg, 0, d) for d in domains], axis=0)
        floor = 1e-12
        log_odds = np.where(
            (p1 > 0) | (p0 > 0),
            np.log(np.maximum(p1, floor)) - np.log(np.maximum(p0, floor)),
            0.0,
        )
        prior1 = float(np.mean([cfg.domain_label_prior(d) for d in domains]))
        prior_logit = math.log(max(prior1, floor)) - math.log(max(1 - prior1, floor))
        return cls(log_odds=log_odds, prior_logit=prior_logit)

    def score(self, tokens) -> float:
        return float(self.prior_logit + self.log_odds[np.asarray(tokens, dtype=np.int64)].sum())

    def predict(self, tokens) -> int:
        return 1 if self.score(tokens) > 0 else 0

    def accuracy(self, examples) -> float:
        hits = sum(1 for ex in examples if self.predict(ex.tokens) == ex.label)
        return hits / len(examples)


# ---------------------------------------------------------------------------
# Train/validation split
# ---------------------------------------------------------------------------


class SplitError(ValueError):
    pass


def split(bundle: DatasetBundle, train_frac: float, seed: int = 0) -> tuple[DatasetBundle, DatasetBundle]:
    """Disjoint, exhaustive, label-stratified split within each domain."""
    if not 0.0 < train_frac < 1.0:
        raise SplitError(f"train_frac={train_frac} must be in (0, 1)")
    train_dom: list[tuple[Example, ...]] = []
    val_dom: list[tuple[Example, ...]] = []
    for d, examples in enumerate(bundle.by_domain):
        rng = seeding.rng(seed, seeding.K_SPLIT, d)
        train_idx: list[int] = []
        val_idx: list[int] = []
        for label in (0, 1):
            idx = np.array([i for i, ex in enumerate(examples) if ex.label == label])
            if len(idx) < 2:
                raise SplitError(
                    f"domain {d} has {len(idx)} examples with label {label}; need >= 2"
                )
            rng.shuffle(idx)
            n_train = int(round(train_frac * len(idx)))
            if n_train == 0 or n_train == len(idx):
                raise SplitError(
                    f"train_frac={train_frac} leaves an empty side for label {label} "
                    f"in domain {d} ({len(idx)} examples)"
                )
            train_idx += idx[:n_train].tolist()
            val_idx += idx[n_train:].tolist()
        train_dom.append(tuple(examples[i] for i in sorted(train_idx)))
        val_dom.append(tuple(examples[i] for i in sorted(val_idx)))
    train = DatasetBundle(tuple(train_dom), bundle.vocab, bundle.config)
    val = DatasetBundle(tuple(val_dom), bundle.vocab, bundle.config)
    return train, val


# ---------------------------------------------------------------------------
# JSONL persistence
# ---------------------------------------------------------------------------

DATA_FILE = "data.jsonl"
VOCAB_FILE = "vocab.json"


def save_jsonl(bundle: DatasetBundle, out_dir) -> None:
    """Write data.jsonl plus the vocabulary sidecar (token -> id, pool)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sidecar = {
        "tokens": [
            {"token": t, "id": i, "pool": p}
            for i, (t, p) in enumerate(zip(bundle.vocab.tokens, bundle.vocab.pools))
        ],
        "domains": list(bundle.vocab.domains),
    }
    if bundle.config is not None:
        cfg = bundle.config
        sidecar["config"] = {
            **{k: getattr(cfg, k) for k in GenConfig.__dataclass_fields__ if k != "ambiguity_sign"},
            "ambiguity_sign": (
                None if cfg.ambiguity_sign is None else [list(r) for r in cfg.ambiguity_sign]
            ),
        }
    (out / VOCAB_FILE).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    with open(out / DATA_FILE, "w", encoding="utf-8") as fh:
        for examples in bundle.by_domain:
            for ex in examples:
                rec = {
                    "tokens": [bundle.vocab.tokens[t] for t in ex.tokens],
                    "label": ex.label,
                    "domain": bundle.vocab.domains[ex.domain],
                }
                fh.write(json.dumps(rec, separators=(", ", ": ")) + "\n")


def load_jsonl(data_dir) -> DatasetBundle:
    """Load a bundle saved by ``save_jsonl`` (or matching the same format)."""
    root = Path(data_dir)
    vocab_path = root / VOCAB_FILE
    data_path = root / DATA_FILE
    if not vocab_path.exists():
        raise DataFormatError(f"missing vocabulary sidecar {vocab_path}")
    if not data_path.exists():
        raise DataFormatError(f"missing dataset file {data_path}")
    side = json.loads(vocab_path.read_text())
    entries = sorted(side["tokens"], key=lambda e: e["id"])
    vocab = Vocabulary(
        tokens=tuple(e["token"] for e in entries),
        pools=tuple(e["pool"] for e in entries),
        domains=tuple(side["domains"]),
    )
    config = None
    if side.get("config") is not None:
        raw = dict(side["config"])
        if raw.get("ambiguity_sign") is not None:
            raw["ambiguity_sign"] = tuple(tuple(r) for r in raw["ambiguity_sign"])
        config = GenConfig(**raw)

    per_domain: dict[int, list[Example]] = {i: [] for i in range(len(vocab.domains))}
    with open(data_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as err:
                raise DataFormatError(f"{data_path} line {lineno}: invalid JSON ({err.msg})") from None
            for key in ("tokens", "label", "domain"):
                if key not in rec:
                    raise DataFormatError(f"{data_path} line {lineno}: missing {key!r}")
            try:
                domain = vocab.domain_index(rec["domain"])
                tokens = tuple(vocab.id_of(t) for t in rec["tokens"])
            except DataFormatError as err:
                raise DataFormatError(f"{data_path} line {lineno}: {err}") from None
            label = rec["label"]
            if label not in (0, 1):
                raise DataFormatError(f"{data_path} line {lineno}: label {label!r} not in {{0, 1}}")
            features = None
            if config is not None and config.raw_features:
                features = raw_feature_vector(config, vocab, tokens, domain)
            per_domain[domain].append(
                Example(tokens=tokens, label=int(label), domain=domain, features=features)
            )
    by_domain = tuple(tuple(per_domain[i]) for i in range(len(vocab.domains)))
    return DatasetBundle(by_domain, vocab, config)


# ---------------------------------------------------------------------------
# Exact SCM projection of the generator
# ---------------------------------------------------------------------------


def oracle_scm(cfg: GenConfig) -> ScmSpec:
    """Project the generator onto a discrete SCM over (D, Y, MInv, MSpc).

    ``MInv`` is the positive-polarity indicator of one invariant slot
    (negation flips marginalized out); ``MSpc`` is the token identity of
    one ambiguous slot. CPT entries are the generator's sampling
    probabilities, exactly, so back-door quantities computed on this
    model are ground truth for the generator.
    """
    validate_config(cfg)
    sign = cfg.resolved_sign()
    s, a = cfg.effective_invariant_agreement(), cfg.ambiguous_strength
    n_dom, n_amb = cfg.num_domains, cfg.n_ambiguous

    variables = [("D", n_dom), ("Y", 2), ("MInv", 2), ("MSpc", n_amb)]
    edges = [("Y", "MInv"), ("D", "MSpc"), ("Y", "MSpc")]
    confounded = cfg.confound_strength > 0.0
    if confounded:
        edges.insert(0, ("D", "Y"))

    cpt_d = np.full((1, n_dom), 1.0 / n_dom)
    if confounded:
        cpt_y = np.array(
            [[1.0 - cfg.domain_label_prior(d), cfg.domain_label_prior(d)] for d in range(n_dom)]
        )
    else:
        cpt_y = np.array([[1.0 - cfg.label_balance, cfg.label_balance]])
    # MInv = 1 iff the invariant slot token came from the positive pool
    cpt_minv = np.array([[s, 1.0 - s], [1.0 - s, s]])  # rows y=0, y=1
    # MSpc rows over parents (D, Y) lexicographic
    rows = []
    for d in range(n_dom):
        pos = sign[d] == 1
        n_pos, n_neg = int(pos.sum()), int((~pos).sum())
        for y in (0, 1):
            p_agree = a if y == 1 else 1.0 - a
            row = np.where(pos, p_agree / n_pos, (1.0 - p_agree) / n_neg)
            rows.append(row)
    cpt_mspc = np.array(rows)
    return ScmSpec(
        variables,
        edges,
        {"D": cpt_d, "Y": cpt_y, "MInv": cpt_minv, "MSpc": cpt_mspc},
    )
