"""Command-line entry point.

Subcommands: gen-data, train, lodo, grid-search, eval, check-backdoor,
export-reps, ablate. Every path is resolved against --workdir. Exit
codes: 0 success, 2 usage/configuration error, 3 numerical failure at
runtime. All randomness derives from a single --seed via fixed spawn
keys, so every sub-run is independently reproducible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, datagen, evaluation, nn, scm, training
from .estimators import DisentangledSentimentClassifier, ERMClassifier, load_model, save_model
from .validation import InputError

CONFIG_ERRORS = (
    datagen.GenConfigError,
    datagen.DataFormatError,
    datagen.SplitError,
    scm.ScmError,
    InputError,
    training.TrainConfigError,
    training.ProtocolError,
    FileNotFoundError,
    NotADirectoryError,
    json.JSONDecodeError,
    KeyError,
    TypeError,
    ValueError,
)

NUMERICAL_ERRORS = (training.NonFiniteLossError, nn.NonFiniteGradientError, nn.NNError)

ABLATION_VARIANTS = ("full", "wo-invariant", "wo-specific", "erm")


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _resolve(workdir: str, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else Path(workdir) / p


def _load_json(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_manifest(out_dir: Path, *, config_obj, data_hash: str | None, seed: int) -> None:
    manifest = {
        "config_hash": _sha256_bytes(_canonical_json(config_obj).encode()),
        "data_hash": data_hash,
        "seed": seed,
        "version": __version__,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _gen_config_from_file(path: Path, seed: int | None) -> datagen.GenConfig:
    raw = _load_json(path)
    if not isinstance(raw, dict):
        raise datagen.GenConfigError(["config file must hold a JSON object"])
    preset = raw.pop("preset", None)
    if raw.get("ambiguity_sign") is not None:
        raw["ambiguity_sign"] = tuple(tuple(r) for r in raw["ambiguity_sign"])
    if preset == "hard":
        cfg = datagen.hard_preset(
            num_domains=raw.pop("num_domains", 4),
            examples_per_domain=raw.pop("examples_per_domain", 2000),
            seed=raw.pop("seed", 0),
            **raw,
        )
    elif preset is None:
        unknown = set(raw) - set(datagen.GenConfig.__dataclass_fields__)
        if unknown:
            raise datagen.GenConfigError([f"unknown config fields: {sorted(unknown)}"])
        cfg = datagen.GenConfig(**raw)
    else:
        raise datagen.GenConfigError([f"unknown preset {preset!r} (only 'hard')"])
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _estimator_from_file(path: Path | None, seed: int | None) -> DisentangledSentimentClassifier:
    params = {} if path is None else _load_json(path)
    if not isinstance(params, dict):
        raise InputError("train config must hold a JSON object of estimator parameters")
    known = set(DisentangledSentimentClassifier().get_params())
    unknown = set(params) - known
    if unknown:
        raise InputError(f"unknown estimator parameters: {sorted(unknown)}; known: {sorted(known)}")
    est = DisentangledSentimentClassifier(**params)
    if seed is not None:
        est.set_params(seed=seed)
    return est


def _ablated(est: DisentangledSentimentClassifier, variant: str):
    if variant == "full":
        return est
    if variant == "wo-invariant":
        out = DisentangledSentimentClassifier(**est.get_params())
        out.set_params(enable_invariant=False)
        return out
    if variant == "wo-specific":
        out = DisentangledSentimentClassifier(**est.get_params())
        out.set_params(enable_specific=False)
        return out
    if variant == "erm":
        p = est.get_params()
        return ERMClassifier(
            embed_dim=p["embed_dim"], lr=p["lr"], batch_size=p["batch_size"],
            epochs=p["epochs"], patience=p["patience"], val_fraction=p["val_fraction"],
            vocab_size=p["vocab_size"], seed=p["seed"],
        )
    raise InputError(f"unknown ablation {variant!r}; choose from {ABLATION_VARIANTS}")


def _bundle_xy(bundle):
    X, y, doms = training._fold_training_data(bundle, list(range(bundle.num_domains)))
    return X, y, doms


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    cfg = _gen_config_from_file(_resolve(args.workdir, args.config), args.seed)
    bundle = datagen.generate(cfg)
    out = _resolve(args.workdir, args.out)
    datagen.save_jsonl(bundle, out)
    data_hash = _sha256_bytes((out / datagen.DATA_FILE).read_bytes())
    cfg_obj = json.loads((out / datagen.VOCAB_FILE).read_text())["config"]
    _write_manifest(out, config_obj=cfg_obj, data_hash=data_hash, seed=cfg.seed)
    total = sum(len(d) for d in bundle.by_domain)
    print(f"wrote {total} examples across {bundle.num_domains} domains to {out}")
    return 0


def cmd_train(args) -> int:
    bundle = datagen.load_jsonl(_resolve(args.workdir, args.data))
    est = _estimator_from_file(
        None if args.config is None else _resolve(args.workdir, args.config), args.seed
    )
    est.set_params(vocab_size=len(bundle.vocab))
    X, y, doms = _bundle_xy(bundle)
    est.fit(X, y, domains=doms)
    out = _resolve(args.workdir, args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(est, out)
    training.history_to_csv(est.history_, out / "history.csv")
    data_hash = _sha256_bytes((_resolve(args.workdir, args.data) / datagen.DATA_FILE).read_bytes())
    _write_manifest(out, config_obj=est.get_params(), data_hash=data_hash, seed=est.seed)
    print(
        f"trained on {len(y)} examples; best validation accuracy "
        f"{est.best_val_accuracy_:.4f} at epoch {est.best_epoch_}"
    )
    return 0


def cmd_lodo(args) -> int:
    bundle = datagen.load_jsonl(_resolve(args.workdir, args.data))
    base = _estimator_from_file(
        None if args.config is None else _resolve(args.workdir, args.config), args.seed
    )
    est = _ablated(base, args.ablate)
    label = {"full": "ours"}.get(args.ablate, args.ablate)
    report = training.leave_one_domain_out(est, bundle, seed=args.seed or 0, method=label)
    print(report.render())
    if args.report:
        path = _resolve(args.workdir, args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.to_json() + "\n")
    return 0


def cmd_grid_search(args) -> int:
    bundle = datagen.load_jsonl(_resolve(args.workdir, args.data))
    est = _estimator_from_file(
        None if args.config is None else _resolve(args.workdir, args.config), args.seed
    )
    alphas = [float(a) for a in args.alphas.split(",")] if args.alphas else list(training.DEFAULT_GRID)
    betas = [float(b) for b in args.betas.split(",")] if args.betas else list(training.DEFAULT_GRID)
    report = training.grid_search(est, bundle, alphas, betas, seed=args.seed or 0)
    print(
        f"best alpha={report.best_alpha} beta={report.best_beta} "
        f"validation accuracy {report.best_val_accuracy:.4f}"
    )
    if args.report:
        path = _resolve(args.workdir, args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.to_json() + "\n")
    return 0


def cmd_eval(args) -> int:
    bundle = datagen.load_jsonl(_resolve(args.workdir, args.data))
    est = load_model(_resolve(args.workdir, args.model))
    rows = []
    accs = {}
    for d in range(bundle.num_domains):
        X, y = training.examples_to_xy(bundle.examples_for(d))
        accs[bundle.vocab.domains[d]] = evaluation.accuracy(y, est.predict(X))
    avg = float(np.mean(list(accs.values())))
    rows.append(("model", accs, avg))
    print(training.render_accuracy_table(rows, bundle.vocab.domains))
    payload = {"accuracies": accs, "average": avg}
    if args.probes:
        X, y, doms = _bundle_xy(bundle)
        payload["probes"] = evaluation.probe_suite(est, X, doms, y, seed=args.seed or 0)
        print("probes:", json.dumps(payload["probes"], sort_keys=True))
    if args.report:
        path = _resolve(args.workdir, args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_check_backdoor(args) -> int:
    model_spec = scm.read_scm_file(_resolve(args.workdir, args.scm))
    criterion = scm.backdoor_criterion(model_spec, args.x, args.y, {args.adj})
    print(criterion.render())
    joint = scm.joint_distribution(model_spec)
    report = scm.check_adjustment_invariance(model_spec, args.x, args.y, args.adj, eps=args.eps)
    card = model_spec.cardinality(args.x)
    for xv in range(card):
        try:
            cond = scm.conditional(joint, args.y, {args.x: xv})
        except scm.ZeroProbabilityError:
            print(f"{args.x}={xv}: zero probability, skipped")
            continue
        adjusted = scm.backdoor_adjust(model_spec, args.x, xv, args.y, args.adj, unchecked=True)
        print(
            f"{args.x}={xv}: P({args.y}|{args.x}={xv}) = {np.round(cond, 6).tolist()}  "
            f"P({args.y}|do({args.x}={xv})) = {np.round(adjusted, 6).tolist()}  "
            f"TV deviation = {report.per_value.get(xv, 0.0):.6g}"
        )
    verdict = "holds" if report.holds else "violated"
    print(f"adjustment invariance {verdict}; max deviation {report.max_deviation:.6g}")
    return 0


def cmd_export_reps(args) -> int:
    bundle = datagen.load_jsonl(_resolve(args.workdir, args.data))
    est = load_model(_resolve(args.workdir, args.model))
    domains = range(bundle.num_domains) if args.domain is None else [args.domain]
    X: list[list[int]] = []
    y: list[int] = []
    doms: list[int] = []
    for d in domains:
        for ex in bundle.examples_for(d):
            X.append(list(ex.tokens))
            y.append(ex.label)
            doms.append(ex.domain)
    out = _resolve(args.workdir, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = evaluation.export_representations(
        est, X, y, doms, out, domain_names=list(bundle.vocab.domains)
    )
    print(f"wrote {rows} rows to {out}")
    return 0


def cmd_ablate(args) -> int:
    bundle = datagen.load_jsonl(_resolve(args.workdir, args.data))
    base = _estimator_from_file(
        None if args.config is None else _resolve(args.workdir, args.config), args.seed
    )
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed or 0]
    methods = {
        "ours": _ablated(base, "full"),
        "w/o invariant": _ablated(base, "wo-invariant"),
        "w/o specific": _ablated(base, "wo-specific"),
        "w/o both (erm)": _ablated(base, "erm"),
    }
    report = evaluation.evaluate_methods(bundle, methods, seeds)
    print(report.render())
    if args.report:
        path = _resolve(args.workdir, args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.to_json() + "\n")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causaldg",
        description="Back-door-adjusted domain generalization workflows",
    )
    parser.add_argument("--workdir", default=".", help="base directory for relative paths")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic multi-domain dataset")
    p.add_argument("--config", required=True, help="generator config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train on all domains of a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None, help="estimator parameter JSON")
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("lodo", help="leave-one-domain-out evaluation")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--report", default=None, help="write the report JSON here")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ablate", choices=ABLATION_VARIANTS, default="full")
    p.set_defaults(fn=cmd_lodo)

    p = sub.add_parser("grid-search", help="alpha/beta grid by validation accuracy")
    p.add_argument("--data", required=True, help="dataset WITHOUT any test domain")
    p.add_argument("--config", default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--alphas", default=None, help="comma-separated values")
    p.add_argument("--betas", default=None, help="comma-separated values")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_grid_search)

    p = sub.add_parser("eval", help="evaluate a saved model per domain")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, help="directory written by train")
    p.add_argument("--report", default=None)
    p.add_argument("--probes", action="store_true", help="also run representation probes")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("check-backdoor", help="criterion + adjustment report for an SCM file")
    p.add_argument("--scm", required=True, help="SCM text file")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--adj", required=True)
    p.add_argument("--eps", type=float, default=1e-9)
    p.set_defaults(fn=cmd_check_backdoor)

    p = sub.add_parser("export-reps", help="dump representations with PCA projection")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--domain", type=int, default=None)
    p.set_defaults(fn=cmd_export_reps)

    p = sub.add_parser("ablate", help="full model vs ablations vs ERM, LODO table")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", default=None, help="comma-separated seed list")
    p.set_defaults(fn=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except NUMERICAL_ERRORS as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except CONFIG_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
