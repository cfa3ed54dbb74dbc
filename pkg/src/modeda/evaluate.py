"""Metrics, split protocols and the none / EDA / Mod-EDA comparison runner."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from modeda.augment import AugmentationConfig, Augmenter
from modeda.classify import TrainConfig, predict_corpus, train
from modeda.corpus import EMPTY_STOPWORDS, Corpus, StopwordList
from modeda.keywords import DEFAULT_TOP_M, build_class_keywords

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "SplitPlan",
    "RunResult",
    "ComparisonReport",
    "confusion_and_metrics",
    "metrics_from_confusion",
    "kfold",
    "paper_protocol_split",
    "compare_augmenters",
    "SPLIT_MODES",
]

SPLIT_MODES = ("strict", "paper")


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray  # rows gold, columns predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricsReport:
    classes: tuple
    precision: dict
    recall: dict
    f1: dict
    support: dict
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    accuracy: float
    # classes whose precision or recall hit 0/0 and were set to 0
    undefined: tuple = ()

    def headline(self) -> dict:
        return {
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "micro_f1": self.micro_f1,
            "accuracy": self.accuracy,
        }

    def to_dict(self) -> dict:
        d = self.headline()
        d["micro_precision"] = self.micro_precision
        d["micro_recall"] = self.micro_recall
        d["per_class"] = {
            c: {"precision": self.precision[c], "recall": self.recall[c], "f1": self.f1[c], "support": self.support[c]}
            for c in self.classes
        }
        d["undefined"] = list(self.undefined)
        return d


def _ratio(num, den) -> float:
    return float(num) / den if den else 0.0


def _f1(p, r) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def metrics_from_confusion(cm: ConfusionMatrix) -> MetricsReport:
    counts = cm.counts
    tp = np.diag(counts)
    pred_tot = counts.sum(axis=0)
    gold_tot = counts.sum(axis=1)
    precision, recall, f1, support = {}, {}, {}, {}
    undefined = []
    for i, c in enumerate(cm.classes):
        p = _ratio(tp[i], pred_tot[i])
        r = _ratio(tp[i], gold_tot[i])
        if pred_tot[i] == 0 or gold_tot[i] == 0:
            undefined.append(c)
        precision[c], recall[c], f1[c], support[c] = p, r, _f1(p, r), int(gold_tot[i])
    k = len(cm.classes)
    total = cm.total
    acc = _ratio(tp.sum(), total)
    return MetricsReport(
        classes=cm.classes,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        macro_precision=sum(precision.values()) / k,
        macro_recall=sum(recall.values()) / k,
        macro_f1=sum(f1.values()) / k,
        # single-label: micro P = micro R = accuracy
        micro_precision=acc,
        micro_recall=acc,
        micro_f1=acc,
        accuracy=acc,
        undefined=tuple(undefined),
    )


def confusion_and_metrics(golds: Sequence[str], preds: Sequence[str], classes: Optional[Sequence[str]] = None):
    if len(golds) != len(preds):
        raise ValueError(f"{len(golds)} gold labels but {len(preds)} predictions")
    if not golds:
        raise ValueError("nothing to evaluate")
    if classes is None:
        classes = sorted(set(golds) | set(preds))
    classes = tuple(classes)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for g, p in zip(golds, preds):
        try:
            counts[index[g], index[p]] += 1
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not among classes") from None
    cm = ConfusionMatrix(classes, counts)
    return cm, metrics_from_confusion(cm)


def _ids(corpus_or_ids) -> list:
    if isinstance(corpus_or_ids, Corpus):
        return [d.id for d in corpus_or_ids]
    return list(corpus_or_ids)


def kfold(corpus, k: int, seed: int = 0) -> list:
    """``k`` (train_ids, test_ids) pairs over a seeded shuffle; test folds differ in size by at most one."""
    ids = _ids(corpus)
    if k < 1 or k > len(ids):
        raise ValueError(f"k={k} invalid for {len(ids)} documents")
    perm = np.random.default_rng(seed).permutation(len(ids))
    folds = np.array_split(perm, k)
    out = []
    for f in range(k):
        test = [ids[i] for i in folds[f]]
        test_set = set(test)
        out.append(([i for i in (ids[j] for j in perm) if i not in test_set], test))
    return out


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SplitPlan:
    train: tuple
    validation: tuple
    heldout: tuple
    seed: int


def paper_protocol_split(corpus, seed: int = 0) -> SplitPlan:
    """Hold out a random 10%, then split the remaining 90% 80/20 into train and validation."""
    ids = _ids(corpus)
    n = len(ids)
    if n < 10:
        raise ValueError(f"need at least 10 documents, got {n}")
    perm = [ids[i] for i in np.random.default_rng(seed).permutation(n)]
    n_held = _round_half_up(0.1 * n)
    heldout, block = perm[:n_held], perm[n_held:]
    n_val = _round_half_up(0.2 * len(block))
    return SplitPlan(tuple(block[n_val:]), tuple(block[:n_val]), tuple(heldout), seed)


@dataclass(frozen=True)
class RunResult:
    mode: str
    seed: int
    n_train: int
    n_validation: int
    n_heldout: int
    validation: MetricsReport
    heldout: MetricsReport
    test: Optional[MetricsReport] = None

    def sections(self) -> dict:
        out = {"validation": self.validation, "heldout": self.heldout}
        if self.test is not None:
            out["test"] = self.test
        return out


def _mean_std(values) -> dict:
    arr = np.array(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


@dataclass
class ComparisonReport:
    modes: tuple
    seeds: tuple
    split: str
    runs: list  # RunResult, ordered by (mode position, seed position)
    summary: dict = field(default_factory=dict)
    deltas: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self._summarize()

    def _summarize(self):
        sections = list(self.runs[0].sections()) if self.runs else []
        for mi, mode in enumerate(self.modes):
            # duplicate mode names get their own slot
            key = mode if self.modes.count(mode) == 1 else f"{mode}#{mi}"
            runs = self.runs[mi * len(self.seeds):(mi + 1) * len(self.seeds)]
            self.summary[key] = {
                sec: {m: _mean_std([r.sections()[sec].headline()[m] for r in runs])
                      for m in runs[0].sections()[sec].headline()}
                for sec in sections
            }
        keys = list(self.summary)
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                self.deltas[f"{b} - {a}"] = {
                    sec: self.summary[b][sec]["macro_f1"]["mean"] - self.summary[a][sec]["macro_f1"]["mean"]
                    for sec in sections
                }

    def mean(self, mode: str, section: str, metric: str = "macro_f1") -> float:
        return self.summary[mode][section][metric]["mean"]

    def to_dict(self) -> dict:
        return {
            "modes": list(self.modes),
            "seeds": list(self.seeds),
            "split": self.split,
            "summary": self.summary,
            "macro_f1_deltas": self.deltas,
            "runs": [
                {
                    "mode": r.mode,
                    "seed": r.seed,
                    "n_train": r.n_train,
                    "n_validation": r.n_validation,
                    "n_heldout": r.n_heldout,
                    **{sec: m.to_dict() for sec, m in r.sections().items()},
                }
                for r in self.runs
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_text(self) -> str:
        sections = list(self.runs[0].sections()) if self.runs else []
        cols = [(sec, m) for sec in sections for m in ("macro_precision", "macro_recall", "macro_f1")]
        head = ["mode"] + [f"{sec[:4]}-{m.split('_')[1][0].upper()}" for sec, m in cols]
        rows = [head]
        for key, summ in self.summary.items():
            rows.append([key] + [f"{summ[sec][m]['mean']:.4f}±{summ[sec][m]['std']:.4f}" for sec, m in cols])
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        lines = [f"split={self.split} seeds={','.join(map(str, self.seeds))}"]
        for r in rows:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        for name, d in self.deltas.items():
            lines.append(f"delta macro-F1 {name}: " + ", ".join(f"{sec}={v:+.4f}" for sec, v in d.items()))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mode", "seed", "section", "macro_precision", "macro_recall", "macro_f1", "micro_f1", "accuracy"])
        for r in self.runs:
            for sec, m in r.sections().items():
                h = m.headline()
                w.writerow([r.mode, r.seed, sec] + [repr(h[k]) for k in
                                                    ("macro_precision", "macro_recall", "macro_f1", "micro_f1", "accuracy")])
        return buf.getvalue()


def _evaluate(model, docs, store) -> MetricsReport:
    golds = [d.label for d in docs]
    preds = predict_corpus(model, docs, store)
    classes = sorted(set(model.classes) | set(golds))
    return confusion_and_metrics(golds, preds, classes)[1]


def _run_one(corpus, mode, seed, base, train_config, store, lexicon, synonyms, stopwords, split,
             test_corpus, feature_mode, top_m) -> RunResult:
    plan = paper_protocol_split(corpus, seed)
    aug_config = replace(base, mode=mode, seed=seed)
    if split == "strict":
        pool = corpus.subset(plan.train)
    else:
        pool = corpus.subset(plan.train + plan.validation)
    table = build_class_keywords(pool, stopwords, top_m) if mode == "mod_eda" else None
    augmenter = Augmenter(aug_config, store, lexicon, table, synonyms=synonyms, stopwords=stopwords)
    augmented = augmenter.augment_corpus(pool).corpus
    if split == "strict":
        train_docs = list(augmented)
        val_docs = list(corpus.subset(plan.validation))
    else:
        # augmented siblings of one source may land on both sides here
        docs = list(augmented)
        perm = np.random.default_rng(seed).permutation(len(docs))
        n_val = _round_half_up(0.2 * len(docs))
        val_docs = [docs[i] for i in perm[:n_val]]
        train_docs = [docs[i] for i in perm[n_val:]]
    model = train(Corpus(tuple(train_docs)), store, feature_mode, replace(train_config, seed=seed))
    held_docs = list(corpus.subset(plan.heldout))
    return RunResult(
        mode=mode,
        seed=seed,
        n_train=len(train_docs),
        n_validation=len(val_docs),
        n_heldout=len(held_docs),
        validation=_evaluate(model, val_docs, store),
        heldout=_evaluate(model, held_docs, store),
        test=_evaluate(model, list(test_corpus), store) if test_corpus is not None else None,
    )


def compare_augmenters(corpus: Corpus, modes: Sequence[str], seeds: Sequence[int],
                       train_config: TrainConfig = TrainConfig(), *, store=None, lexicon=None,
                       synonyms=None, stopwords: StopwordList = EMPTY_STOPWORDS,
                       augmentation: AugmentationConfig = AugmentationConfig(), split: str = "strict",
                       test_corpus: Optional[Corpus] = None, feature_mode: str = "bow",
                       top_m: int = DEFAULT_TOP_M, workers: int = 1) -> ComparisonReport:
    """Train and score one classifier per (mode, seed).

    Each run splits ``corpus`` with :func:`paper_protocol_split`, augments per
    ``split`` ("strict": training part only; "paper": the whole 90% block,
    then an 80/20 split of the augmented pool), trains, and scores the
    validation part, the 10% held-out originals and, when given, the
    separate ``test_corpus``. The report is independent of ``workers``.
    """
    modes, seeds = tuple(modes), tuple(seeds)
    if len(modes) < 2:
        raise ValueError("compare needs at least two modes")
    if not seeds:
        raise ValueError("compare needs at least one seed")
    if split not in SPLIT_MODES:
        raise ValueError(f"split must be one of {SPLIT_MODES}")
    jobs = [(m, s) for m in modes for s in seeds]

    def job(ms):
        return _run_one(corpus, ms[0], ms[1], augmentation, train_config, store, lexicon, synonyms,
                        stopwords, split, test_corpus, feature_mode, top_m)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(job, jobs))
    else:
        runs = [job(j) for j in jobs]
    return ComparisonReport(modes, seeds, split, runs)
