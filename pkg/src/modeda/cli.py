"""``modeda`` command-line interface.

Exit status: 0 on success, 1 on usage errors, 2 on data errors. Every
command that writes ``--out`` also writes ``<out>.manifest.json`` holding
the resolved settings and input digests; ``modeda replay`` re-runs it.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import sys
from pathlib import Path

from modeda import __version__, bundled, kernels
from modeda.augment import MODES, AugmentationConfig, Augmenter, write_augmented_jsonl
from modeda.classify import FEATURE_MODES, TrainConfig, load_model, predict_corpus, save_model, train
from modeda.corpus import EMPTY_STOPWORDS, clean_text, default_stopwords, load_corpus, load_stopwords, tokenize
from modeda.embeddings import EmbedTrainConfig, OOVError, load_vectors, save_vectors, train_embeddings
from modeda.evaluate import SPLIT_MODES, compare_augmenters, confusion_and_metrics
from modeda.keywords import DEFAULT_TOP_M, build_class_keywords
from modeda.sentiment import default_lexicon, load_lexicon, sentence_polarity

log = logging.getLogger("modeda")

# option dests that name input files, digested into the manifest
INPUT_KEYS = ("corpus", "heldout", "vectors", "lexicon", "synonyms", "stopwords", "model", "config")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- helpers

def _stopwords(args):
    if getattr(args, "keep_stopwords", False):
        return EMPTY_STOPWORDS
    return load_stopwords(args.stopwords) if args.stopwords else default_stopwords()


def _corpus(args, path=None):
    sw = _stopwords(args)
    return load_corpus(path or args.corpus, args.format, stopwords=sw, drop_stopwords=sw is not EMPTY_STOPWORDS)


def _vectors(args):
    return load_vectors(args.vectors) if args.vectors else bundled.vectors()


def _lexicon(args):
    return load_lexicon(args.lexicon) if args.lexicon else default_lexicon()


def _synonyms(args):
    from modeda.augment import load_synonyms

    return load_synonyms(args.synonyms) if args.synonyms else bundled.synonyms()


def _aug_config(args):
    return AugmentationConfig(t=args.t, n_sub=args.n_sub, n_ins=args.n_ins, n_swap=args.n_swap,
                              p_del=args.p_del, n_aug=args.n_aug, seed=args.seed, mode=args.mode)


def _train_config(args):
    return TrainConfig(learning_rate=args.lr, epochs=args.epochs, l2=args.l2,
                       batch_size=args.batch_size, seed=args.seed)


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _mode_list(text):
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown mode(s) {bad}; choose from {MODES}")
    return modes


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------- commands

def cmd_augment(args):
    corpus = _corpus(args)
    cfg = _aug_config(args)
    sw = _stopwords(args)
    store = lex = table = None
    synonyms = None
    if cfg.mode == "mod_eda":
        store, lex = _vectors(args), _lexicon(args)
        table = build_class_keywords(corpus, sw, args.top_m)
    elif cfg.mode == "eda":
        synonyms = _synonyms(args)
    result = Augmenter(cfg, store, lex, table, synonyms=synonyms, stopwords=sw).augment_corpus(corpus, args.workers)
    write_augmented_jsonl(result, args.out)
    if args.audit:
        _write(args.audit, "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in result.audit()))
    print(f"wrote {len(result.corpus)} records to {args.out}")
    return {"records": len(result.corpus), "skipped_empty": result.skipped}


def cmd_train_embeddings(args):
    corpus = _corpus(args)
    cfg = EmbedTrainConfig(dim=args.dim, window=args.window, x_max=args.x_max, alpha=args.alpha,
                           epochs=args.epochs, learning_rate=args.lr, min_count=args.min_count, seed=args.seed)
    store = train_embeddings(corpus, cfg)
    save_vectors(store, args.out)
    for epoch, loss in enumerate(store.train_history, start=1):
        log.info("epoch %d loss %.6f", epoch, loss)
    print(f"wrote {len(store)} vectors (dim {store.dim}) to {args.out}")
    return {"vocab": len(store), "losses": list(store.train_history)}


def cmd_neighbors(args):
    store = _vectors(args)
    try:
        result = store.most_similar(args.word, args.topn)
    except OOVError:
        raise ValueError(f"{args.word!r} is not in the vector vocabulary") from None
    text = "".join(f"{w}\t{s:.6f}\n" for w, s in result)
    sys.stdout.write(text)
    if args.out:
        _write(args.out, text)


def cmd_sentiment(args):
    tokens = tokenize(clean_text(args.text), _stopwords(args))
    value = sentence_polarity(_lexicon(args), tokens)
    text = f"{value:g}\n"
    sys.stdout.write(text)
    if args.out:
        _write(args.out, text)


def cmd_keywords(args):
    corpus = _corpus(args)
    table = build_class_keywords(corpus, _stopwords(args), args.top_m)
    text = table.to_json() + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_train(args):
    corpus = _corpus(args)
    store = _vectors(args) if args.features == "avg_embedding" else None
    model = train(corpus, store, args.features, _train_config(args))
    save_model(model, args.out)
    print(f"trained {len(model.classes)}-class model, final loss {model.history[-1]:.6f}")
    return {"losses": model.history}


def cmd_evaluate(args):
    model = load_model(args.model)
    corpus = _corpus(args)
    store = _vectors(args) if model.feature_spec.mode == "avg_embedding" else None
    docs = list(corpus)
    if any(not d.label for d in docs):
        raise ValueError("evaluation corpus must be fully labeled")
    preds = predict_corpus(model, docs, store)
    golds = [d.label for d in docs]
    cm, report = confusion_and_metrics(golds, preds, sorted(set(model.classes) | set(golds)))
    payload = report.to_dict()
    payload["confusion"] = {"classes": list(cm.classes), "counts": cm.counts.tolist()}
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if args.out:
        _write(args.out, text)
    print(f"accuracy {report.accuracy:.4f}  macro-P {report.macro_precision:.4f}  "
          f"macro-R {report.macro_recall:.4f}  macro-F1 {report.macro_f1:.4f}")


def cmd_compare(args):
    corpus = _corpus(args)
    test = _corpus(args, args.heldout) if args.heldout else None
    needs_vectors = "mod_eda" in args.modes or args.features == "avg_embedding"
    report = compare_augmenters(
        corpus,
        args.modes,
        args.seeds,
        _train_config(args),
        store=_vectors(args) if needs_vectors else None,
        lexicon=_lexicon(args) if "mod_eda" in args.modes else None,
        synonyms=_synonyms(args) if "eda" in args.modes else None,
        stopwords=_stopwords(args),
        augmentation=_aug_config(args),
        split=args.split,
        test_corpus=test,
        feature_mode=args.features,
        top_m=args.top_m,
        workers=args.workers,
    )
    text = report.to_text()
    sys.stdout.write(text)
    if args.out:
        _write(args.out, report.to_json())
        stem = Path(args.out)
        _write(stem.with_suffix(".txt"), text)
        _write(stem.with_suffix(".csv"), report.to_csv())


def cmd_replay(args):
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    resolved = dict(manifest["config"])
    if args.out:
        resolved["out"] = args.out
    ns = argparse.Namespace(**resolved)
    ns.command = manifest["command"]
    if ns.command == "compare":
        ns.modes = list(ns.modes)
    return _dispatch(ns)


# ---------------------------------------------------------------- parser

def _add_corpus(p, required=True):
    p.add_argument("--corpus", required=required, help="labelled corpus file")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--stopwords", help="stopword file, one word per line (default: bundled English list)")
    p.add_argument("--keep-stopwords", action="store_true", help="do not drop stopwords when tokenizing")


def _add_augment_opts(p):
    p.add_argument("--vectors", help="GloVe text-format vectors (default: bundled 50-d)")
    p.add_argument("--lexicon", help="AFINN word<TAB>score file (default: bundled AFINN-111)")
    p.add_argument("--synonyms", help="word<TAB>syn,syn,... file for EDA (default: bundled WordNet extract)")
    p.add_argument("--t", type=int, default=5, help="candidate list size")
    p.add_argument("--n-aug", type=int, default=9)
    p.add_argument("--n-sub", type=int, default=None)
    p.add_argument("--n-ins", type=int, default=None)
    p.add_argument("--n-swap", type=int, default=None)
    p.add_argument("--p-del", type=float, default=0.1)
    p.add_argument("--top-m", type=int, default=DEFAULT_TOP_M, help="class keywords kept per label")


def _add_train_opts(p):
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--features", choices=FEATURE_MODES, default="bow")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modeda", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"modeda {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--config", help="flat 'key = value' file; command-line flags win")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("augment", help="augment a corpus, write JSONL")
    _add_corpus(p)
    _add_augment_opts(p)
    p.add_argument("--mode", choices=MODES, default="mod_eda")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--audit", help="also write per-edit candidate pools as JSONL")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-embeddings", help="train GloVe vectors on a corpus")
    _add_corpus(p)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--x-max", type=float, default=100.0)
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("neighbors", help="nearest words by cosine similarity")
    p.add_argument("word")
    p.add_argument("--vectors")
    p.add_argument("--topn", type=int, default=10)
    p.add_argument("--out")

    p = sub.add_parser("sentiment", help="AFINN polarity (sum) of a text")
    p.add_argument("text")
    p.add_argument("--lexicon")
    p.add_argument("--stopwords")
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("keywords", help="per-label frequent keywords as JSON")
    _add_corpus(p)
    p.add_argument("--top-m", type=int, default=DEFAULT_TOP_M)
    p.add_argument("--out")

    p = sub.add_parser("train", help="train the linear classifier, write model JSON")
    _add_corpus(p)
    _add_train_opts(p)
    p.add_argument("--vectors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score a saved model on a labelled corpus")
    _add_corpus(p)
    p.add_argument("--model", required=True)
    p.add_argument("--vectors")
    p.add_argument("--out")

    p = sub.add_parser("compare", help="none / EDA / Mod-EDA comparison over seeds")
    _add_corpus(p)
    _add_augment_opts(p)
    _add_train_opts(p)
    p.add_argument("--heldout", help="separate labelled test corpus (same format)")
    p.add_argument("--modes", type=_mode_list, default=["none", "eda", "mod_eda"])
    p.add_argument("--mode", choices=MODES, default="mod_eda", help=argparse.SUPPRESS)
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    p.add_argument("--split", choices=SPLIT_MODES, default="strict")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="report JSON path; .txt and .csv written beside it")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write to this path instead of the recorded one")
    return parser


COMMANDS = {
    "augment": cmd_augment,
    "train-embeddings": cmd_train_embeddings,
    "neighbors": cmd_neighbors,
    "sentiment": cmd_sentiment,
    "keywords": cmd_keywords,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "replay": cmd_replay,
}


def _read_config(path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _apply_config(parser, argv, config_path):
    """Re-parse with config-file values as defaults so explicit flags still win."""
    values = _read_config(config_path)
    probe = parser.parse_args(argv)
    subparser = parser._subparsers._group_actions[0].choices[probe.command]
    actions = {a.dest: a for a in subparser._actions}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "command"):
            raise UsageError(f"{config_path}: unknown setting {key!r} for '{probe.command}'")
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                value = action.type(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{config_path}: bad value for {key!r}: {exc}") from None
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{config_path}: {key} must be one of {sorted(action.choices)}")
        subparser.set_defaults(**{key: value})
    return parser.parse_args(argv)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(args, extra):
    resolved = {k: v for k, v in vars(args).items() if k not in ("command", "verbose")}
    inputs = {}
    for key in INPUT_KEYS:
        p = resolved.get(key)
        if p and Path(p).is_file():
            inputs[key] = {"path": str(p), "sha256": _sha256(p)}
    manifest = {
        "command": args.command,
        "config": resolved,
        "inputs": inputs,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "seed": resolved.get("seed"),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        manifest["result"] = extra
    _write(f"{args.out}.manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _dispatch(args) -> int:
    extra = COMMANDS[args.command](args)
    if args.command != "replay" and getattr(args, "out", None):
        _write_manifest(args, extra)
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("modeda: error: a command is required")
        if args.config:
            args = _apply_config(parser, argv, args.config)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"modeda {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
