"""Mod-EDA and EDA sentence augmentation.

Every operation takes and returns plain token lists plus an edit log. The
log records enough (positions, old and new tokens, the scored candidate
pool) to replay the edit and to audit each choice afterwards.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from modeda.corpus import EMPTY_STOPWORDS, Corpus, Document, StopwordList
from modeda.embeddings import EmbeddingStore
from modeda.keywords import ClassKeywordTable
from modeda.sentiment import SentimentLexicon, sentence_polarity, word_polarity

__all__ = [
    "MODES",
    "AugmentationConfig",
    "Edit",
    "AugmentedSentence",
    "AugmentResult",
    "Augmenter",
    "modified_substitution",
    "modified_insertion",
    "random_swap",
    "random_deletion",
    "eda_synonym_replacement",
    "eda_random_insertion",
    "augment_sentence",
    "augment_corpus",
    "replay",
    "document_seed",
    "load_synonyms",
    "write_augmented_jsonl",
]

MODES = ("none", "eda", "mod_eda")
OP_ORDER = ("sub", "ins", "swap", "del")


@dataclass(frozen=True)
class AugmentationConfig:
    """Knobs for one augmentation run.

    ``n_sub``, ``n_ins`` and ``n_swap`` left as ``None`` scale with sentence
    length: ``max(1, round(alpha * len))``.
    """

    t: int = 5
    n_sub: Optional[int] = None
    n_ins: Optional[int] = None
    n_swap: Optional[int] = None
    p_del: float = 0.1
    n_aug: int = 9
    seed: int = 0
    mode: str = "mod_eda"
    alpha: float = 0.1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.t < 1:
            raise ValueError("t must be positive")
        if self.n_aug < 1:
            raise ValueError("n_aug must be positive")
        for name in ("n_sub", "n_ins", "n_swap"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= self.p_del < 1:
            raise ValueError("p_del must lie in [0, 1)")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    def edit_counts(self, length: int) -> tuple:
        default = max(1, math.floor(self.alpha * length + 0.5))
        pick = lambda v: default if v is None else v  # noqa: E731
        return pick(self.n_sub), pick(self.n_ins), pick(self.n_swap)


@dataclass(frozen=True)
class Edit:
    op: str
    pos: object  # int, or (i, j) for a swap
    old: Optional[str] = None
    new: Optional[str] = None
    # (word, polarity, score) per candidate; score is cosine or keyword count
    candidates: tuple = ()
    # polarity the chosen word was matched against
    reference: Optional[float] = None

    def to_json(self) -> dict:
        pos = list(self.pos) if isinstance(self.pos, tuple) else self.pos
        return {"op": self.op, "pos": pos, "old": self.old, "new": self.new}

    def audit_json(self) -> dict:
        rec = self.to_json()
        if self.candidates:
            rec["candidates"] = [list(c) for c in self.candidates]
            rec["reference"] = self.reference
        return rec


@dataclass(frozen=True)
class AugmentedSentence:
    tokens: tuple
    source_id: str
    label: Optional[str]
    ops_applied: tuple = ()


def replay(tokens: Sequence[str], ops: Sequence[Edit]) -> list:
    """Re-apply an edit log to the source tokens."""
    out = list(tokens)
    for e in ops:
        if e.op == "sub":
            if out[e.pos] != e.old:
                raise ValueError(f"substitution at {e.pos} expected {e.old!r}, found {out[e.pos]!r}")
            out[e.pos] = e.new
        elif e.op == "ins":
            out.insert(e.pos, e.new)
        elif e.op == "swap":
            i, j = e.pos
            out[i], out[j] = out[j], out[i]
        elif e.op == "del":
            if out[e.pos] != e.old:
                raise ValueError(f"deletion at {e.pos} expected {e.old!r}, found {out[e.pos]!r}")
            del out[e.pos]
        else:
            raise ValueError(f"unknown edit op {e.op!r}")
    return out


def _pick_positions(tokens, n, rng, eligible) -> list:
    """Up to ``n`` distinct random positions passing ``eligible``, ``10 * n`` draws at most."""
    chosen = []
    if not tokens:
        return chosen
    attempts = 0
    while len(chosen) < n and attempts < 10 * n:
        attempts += 1
        pos = rng.randrange(len(tokens))
        if pos not in chosen and eligible(tokens[pos]):
            chosen.append(pos)
    return chosen


def modified_substitution(tokens, n_sub, t, store: EmbeddingStore, lex: SentimentLexicon,
                          rng: random.Random, exclude=frozenset()):
    """Swap ``n_sub`` in-vocabulary words for their polarity-closest neighbor.

    For each chosen word the ``t`` nearest embedding neighbors are scored by
    ``|polarity(c) - polarity(w)|``; ties go to the more similar neighbor, then
    alphabetically. Words in ``exclude`` are never used as replacements.
    """
    out = list(tokens)
    edits = []
    for pos in _pick_positions(out, n_sub, rng, lambda w: w in store):
        word = out[pos]
        target = word_polarity(lex, word)
        cands = tuple((c, word_polarity(lex, c), sim)
                      for c, sim in store.most_similar(word, t) if c not in exclude)
        if not cands:
            continue
        best = min(cands, key=lambda c: (abs(c[1] - target), -c[2], c[0]))
        out[pos] = best[0]
        edits.append(Edit("sub", pos, word, best[0], cands, target))
    return out, edits


def modified_insertion(tokens, label, n_ins, t, store: EmbeddingStore, lex: SentimentLexicon,
                       table: ClassKeywordTable, rng: random.Random, exclude=frozenset()):
    """Insert ``n_ins`` class keywords (or their neighbors) matching the sentence polarity.

    Each round draws ``t`` seeds from the label's frequent keywords, widens
    them with ``t`` embedding neighbors apiece, and inserts the pool word
    whose polarity is closest to the original sentence's at a random index.
    Ties prefer seeds (more frequent first), then neighbors (more similar
    first), then alphabetical order.
    """
    if label not in table:
        raise ValueError(f"label {label!r} missing from keyword table")
    keywords = table[label]
    out = list(tokens)
    edits = []
    if not keywords or n_ins <= 0:
        return out, edits
    target = sentence_polarity(lex, tokens)
    for _ in range(n_ins):
        seeds = rng.sample(keywords, min(t, len(keywords)))
        pool = {}
        for word, count in seeds:
            pool[word] = (0, -count, word_polarity(lex, word), count)
        for word, _ in seeds:
            if word not in store:
                continue
            for nb, sim in store.most_similar(word, t):
                if nb in exclude:
                    continue
                key = (1, -sim, word_polarity(lex, nb), sim)
                if nb not in pool or key < pool[nb]:
                    pool[nb] = key
        best = min(pool, key=lambda w: (abs(pool[w][2] - target), pool[w][0], pool[w][1], w))
        pos = rng.randrange(len(out) + 1)
        out.insert(pos, best)
        cands = tuple((w, pool[w][2], pool[w][3]) for w in sorted(pool))
        edits.append(Edit("ins", pos, None, best, cands, target))
    return out, edits


def random_swap(tokens, n_swap, rng: random.Random):
    out = list(tokens)
    edits = []
    if len(out) < 2:
        return out, edits
    for _ in range(n_swap):
        i = rng.randrange(len(out))
        j = rng.randrange(len(out) - 1)
        if j >= i:
            j += 1
        out[i], out[j] = out[j], out[i]
        edits.append(Edit("swap", (i, j), out[j], out[i]))
    return out, edits


def random_deletion(tokens, p_del, rng: random.Random):
    """Drop each token with probability ``p_del``; never returns an empty list
    for non-empty input (one random token survives a total wipe)."""
    out = list(tokens)
    if not out:
        return out, []
    drop = [rng.random() < p_del for _ in out]
    if all(drop):
        drop[rng.randrange(len(out))] = False
    edits = []
    # descending so each logged position is valid when replayed in order
    for pos in range(len(out) - 1, -1, -1):
        if drop[pos]:
            edits.append(Edit("del", pos, out[pos], None))
            del out[pos]
    return out, edits


def eda_synonym_replacement(tokens, n_sub, synonyms: Mapping[str, Sequence[str]], rng: random.Random,
                            stopwords: StopwordList = EMPTY_STOPWORDS):
    out = list(tokens)
    edits = []

    def eligible(w):
        return w not in stopwords and any(s != w for s in synonyms.get(w, ()))

    for pos in _pick_positions(out, n_sub, rng, eligible):
        word = out[pos]
        options = [s for s in synonyms[word] if s != word]
        new = options[rng.randrange(len(options))]
        out[pos] = new
        edits.append(Edit("sub", pos, word, new))
    return out, edits


def eda_random_insertion(tokens, n_ins, vocabulary: Sequence[str], rng: random.Random):
    if not vocabulary:
        raise ValueError("random insertion needs a non-empty vocabulary")
    out = list(tokens)
    edits = []
    for _ in range(n_ins):
        word = vocabulary[rng.randrange(len(vocabulary))]
        pos = rng.randrange(len(out) + 1)
        out.insert(pos, word)
        edits.append(Edit("ins", pos, None, word))
    return out, edits


def document_seed(seed: int, doc_id: str) -> int:
    """Per-document RNG seed: run seed XOR a stable 64-bit hash of the id."""
    h = int.from_bytes(hashlib.blake2b(doc_id.encode("utf-8"), digest_size=8).digest(), "big")
    return (seed & 0xFFFFFFFFFFFFFFFF) ^ h


def load_synonyms(path) -> dict:
    """Read ``word<TAB>syn1,syn2,...`` lines."""
    table = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'word<TAB>syn1,syn2,...'")
        word, rest = line.split("\t", 1)
        syns = tuple(s.strip() for s in rest.split(",") if s.strip())
        if syns:
            table[word.strip()] = syns
    return table


@dataclass
class AugmentResult:
    corpus: Corpus
    sentences: list  # AugmentedSentence per output document, aligned with corpus
    skipped: list = field(default_factory=list)  # ids of token-less documents copied unchanged

    def audit(self) -> list:
        return [
            {"id": doc.id, "source_id": s.source_id, "ops": [e.audit_json() for e in s.ops_applied]}
            for doc, s in zip(self.corpus, self.sentences)
            if s.ops_applied
        ]


class Augmenter:
    """Bundles a config with the resources the chosen mode needs."""

    def __init__(self, config: AugmentationConfig, store: EmbeddingStore = None,
                 lexicon: SentimentLexicon = None, keywords: ClassKeywordTable = None,
                 synonyms: Mapping[str, Sequence[str]] = None, vocabulary: Sequence[str] = None,
                 stopwords: StopwordList = EMPTY_STOPWORDS):
        if config.mode == "mod_eda" and (store is None or lexicon is None):
            raise ValueError("mod_eda needs an embedding store and a sentiment lexicon")
        self.config = config
        self.store = store
        self.lexicon = lexicon
        self.keywords = keywords
        self.synonyms = synonyms or {}
        self.vocabulary = list(vocabulary) if vocabulary is not None else None
        self.stopwords = stopwords

    def _apply(self, op, tokens, doc, counts, rng):
        cfg = self.config
        n_sub, n_ins, n_swap = counts
        if op == "swap":
            return random_swap(tokens, n_swap, rng)
        if op == "del":
            return random_deletion(tokens, cfg.p_del, rng)
        if cfg.mode == "mod_eda":
            if op == "sub":
                return modified_substitution(tokens, n_sub, cfg.t, self.store, self.lexicon, rng,
                                             self.stopwords.words)
            return modified_insertion(tokens, doc.label, n_ins, cfg.t, self.store, self.lexicon,
                                      self.keywords, rng, self.stopwords.words)
        if op == "sub":
            return eda_synonym_replacement(tokens, n_sub, self.synonyms, rng, self.stopwords)
        return eda_random_insertion(tokens, n_ins, self.vocabulary, rng)

    def augment_sentence(self, doc: Document, rng: random.Random = None) -> list:
        cfg = self.config
        if cfg.mode == "none":
            return [AugmentedSentence(tuple(doc.tokens), doc.id, doc.label, ())]
        if not doc.tokens:
            raise ValueError(f"document {doc.id!r} has no tokens to augment")
        if rng is None:
            rng = random.Random(document_seed(cfg.seed, doc.id))
        counts = cfg.edit_counts(len(doc.tokens))
        n_sub, n_ins, n_swap = counts
        enabled = [op for op, on in zip(OP_ORDER, (n_sub > 0, n_ins > 0, n_swap > 0, cfg.p_del > 0)) if on]
        if "ins" in enabled:
            if cfg.mode == "mod_eda" and (self.keywords is None or not doc.label):
                raise ValueError(f"document {doc.id!r}: class-keyword insertion needs a label and a keyword table")
            if cfg.mode == "eda" and not self.vocabulary:
                raise ValueError("eda insertion needs a vocabulary")

        results = []
        for _ in range(cfg.n_aug):
            tokens = list(doc.tokens)
            log = []
            if enabled:
                mask = rng.randint(1, (1 << len(enabled)) - 1)
                for bit, op in enumerate(enabled):
                    if mask >> bit & 1:
                        tokens, edits = self._apply(op, tokens, doc, counts, rng)
                        log.extend(edits)
            results.append(AugmentedSentence(tuple(tokens), doc.id, doc.label, tuple(log)))
        return results

    def _augment_one(self, doc: Document) -> list:
        if not doc.tokens:
            return [AugmentedSentence((), doc.id, doc.label, ()) for _ in range(self.config.n_aug)]
        return self.augment_sentence(doc)

    def augment_corpus(self, corpus: Corpus, workers: int = 1) -> AugmentResult:
        """Originals followed by their augmentations, source order preserved.

        Each document draws from its own RNG seeded by :func:`document_seed`,
        so the output does not depend on ``workers``.
        """
        cfg = self.config
        originals = [AugmentedSentence(tuple(d.tokens), d.id, d.label, ()) for d in corpus]
        if cfg.mode == "none":
            return AugmentResult(corpus, originals)
        if cfg.mode == "eda" and self.vocabulary is None:
            self.vocabulary = sorted({t for d in corpus for t in d.tokens})
        docs = list(corpus)
        if workers > 1 and len(docs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                augmented = list(pool.map(self._augment_one, docs, chunksize=16))
        else:
            augmented = [self._augment_one(d) for d in docs]

        out_docs, sentences, skipped = [], [], []
        for doc, orig, augs in zip(docs, originals, augmented):
            out_docs.append(doc)
            sentences.append(orig)
            if not doc.tokens:
                skipped.append(doc.id)
            for n, aug in enumerate(augs, start=1):
                text = " ".join(aug.tokens)
                out_docs.append(Document(f"{doc.id}-aug{n}", text, text, aug.tokens, doc.label))
                sentences.append(aug)
        return AugmentResult(Corpus(tuple(out_docs)), sentences, skipped)


def augment_sentence(doc, config, store=None, lex=None, table=None, rng=None, **resources) -> list:
    return Augmenter(config, store, lex, table, **resources).augment_sentence(doc, rng)


def augment_corpus(corpus, config, store=None, lex=None, table=None, workers=1, **resources) -> AugmentResult:
    return Augmenter(config, store, lex, table, **resources).augment_corpus(corpus, workers)


def write_augmented_jsonl(result: AugmentResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc, sent in zip(result.corpus, result.sentences):
            rec = {
                "id": doc.id,
                "label": doc.label,
                "text": doc.raw_text,
                "source_id": sent.source_id,
                "ops": [e.to_json() for e in sent.ops_applied],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
