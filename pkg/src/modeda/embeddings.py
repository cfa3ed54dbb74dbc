"""Word-vector store with exact cosine neighbors, and a small GloVe trainer."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from modeda import kernels

__all__ = [
    "EmbeddingStore",
    "NeighborList",
    "EmbedTrainConfig",
    "OOVError",
    "VectorFormatError",
    "cosine_similarity",
    "load_vectors",
    "save_vectors",
    "build_vocab",
    "cooccurrence_table",
    "train_embeddings",
]

log = logging.getLogger(__name__)


class OOVError(KeyError):
    """The query word is not in the store's vocabulary."""


class VectorFormatError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborList:
    query: str
    neighbors: tuple  # ((word, cosine), ...) best first

    @property
    def words(self) -> list:
        return [w for w, _ in self.neighbors]

    def __len__(self):
        return len(self.neighbors)

    def __iter__(self):
        return iter(self.neighbors)


class EmbeddingStore:
    """Immutable ``word -> vector`` map.

    Unit-normalized rows are computed once so a neighbor query is a single
    dot-product scan. Neighbor results are memoized per ``(word, topn)``.
    """

    def __init__(self, vocab: Sequence[str], vectors):
        vocab = tuple(vocab)
        vectors = np.array(vectors, dtype=np.float64, copy=True)
        if vectors.ndim != 2 or vectors.shape[0] != len(vocab):
            raise ValueError("vectors must be a (len(vocab), dim) matrix")
        if vectors.shape[1] < 1:
            raise ValueError("dim must be positive")
        if not np.isfinite(vectors).all():
            raise ValueError("vectors contain non-finite entries")
        index = {w: i for i, w in enumerate(vocab)}
        if len(index) != len(vocab):
            raise ValueError("duplicate words in vocab")
        vectors.setflags(write=False)
        self.vocab = vocab
        self.vectors = vectors
        self.dim = vectors.shape[1]
        self._index = index
        norms = np.linalg.norm(vectors, axis=1)
        unit = np.divide(vectors, norms[:, None], out=np.zeros_like(vectors), where=norms[:, None] > 0)
        self._unit = np.ascontiguousarray(unit)
        self._unit.setflags(write=False)
        rank = np.empty(len(vocab), dtype=np.int64)
        rank[np.argsort(np.array(vocab, dtype=object), kind="stable")] = np.arange(len(vocab))
        self._lex_rank = rank
        self._cache = {}
        self.train_history = ()

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word) -> bool:
        return word in self._index

    def __repr__(self):
        return f"EmbeddingStore(words={len(self.vocab)}, dim={self.dim})"

    def index(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise OOVError(word) from None

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index(word)]

    def most_similar(self, word: str, topn: int = 10) -> NeighborList:
        if topn < 1:
            raise ValueError("topn must be positive")
        key = (word, topn)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        row = self.index(word)
        idx, scores = kernels.topk_scan(self._unit, self._unit[row], row, self._lex_rank, topn)
        result = NeighborList(word, tuple((self.vocab[i], float(s)) for i, s in zip(idx.tolist(), scores.tolist())))
        self._cache[key] = result
        return result


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError("vectors differ in dimension")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def load_vectors(path) -> EmbeddingStore:
    """Read GloVe text format (``word v1 ... vd`` per line).

    A word seen twice keeps its last vector; the number of overwrites is
    logged.
    """
    index = {}
    rows = []
    dim = None
    duplicates = 0
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").rstrip("\r").split(" ")
            if parts == [""]:
                continue
            word, fields = parts[0], parts[1:]
            if dim is None:
                dim = len(fields)
                if dim == 0:
                    raise VectorFormatError(f"{path}:{lineno}: no vector components")
            elif len(fields) != dim:
                raise VectorFormatError(f"{path}:{lineno}: expected {dim} components, found {len(fields)}")
            try:
                vec = [float(x) for x in fields]
            except ValueError:
                raise VectorFormatError(f"{path}:{lineno}: non-numeric vector component") from None
            if word in index:
                duplicates += 1
                rows[index[word]] = vec
            else:
                index[word] = len(rows)
                rows.append(vec)
    if not rows:
        raise VectorFormatError(f"{path}: no vectors")
    if duplicates:
        log.warning("%s: %d duplicate words overwritten", path, duplicates)
    store = EmbeddingStore(list(index), np.array(rows))
    store.duplicates = duplicates
    return store


def save_vectors(store: EmbeddingStore, path) -> None:
    if len(store) == 0:
        raise ValueError("refusing to write an empty store")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, vec in zip(store.vocab, store.vectors):
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


@dataclass(frozen=True)
class EmbedTrainConfig:
    dim: int = 50
    window: int = 5
    x_max: float = 100.0
    alpha: float = 0.75
    epochs: int = 25
    learning_rate: float = 0.05
    min_count: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.epochs < 1 or self.min_count < 1:
            raise ValueError("dim, window, epochs and min_count must be positive")
        if not self.x_max > 0 or not self.learning_rate > 0:
            raise ValueError("x_max and learning_rate must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")


def _token_lists(corpus) -> list:
    return [list(getattr(doc, "tokens", doc)) for doc in corpus]


def build_vocab(token_lists: Iterable[Sequence[str]], min_count: int) -> list:
    """Words with frequency >= ``min_count``, most frequent first, ties alphabetical."""
    counts = Counter(t for toks in token_lists for t in toks)
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return [w for w, _ in kept]


def cooccurrence_table(token_lists, vocab: Sequence[str], window: int):
    """Symmetric ``1/distance``-weighted counts as sorted COO arrays ``(rows, cols, vals)``.

    Out-of-vocabulary tokens are dropped before windowing.
    """
    index = {w: i for i, w in enumerate(vocab)}
    ids = []
    starts = [0]
    for toks in token_lists:
        ids.extend(index[t] for t in toks if t in index)
        starts.append(len(ids))
    return kernels.cooccurrence(
        np.array(ids, dtype=np.int64), np.array(starts, dtype=np.int64), int(window), len(vocab)
    )


def train_embeddings(corpus, config: EmbedTrainConfig = EmbedTrainConfig()) -> EmbeddingStore:
    """Fit GloVe vectors on ``corpus`` (documents or token lists).

    AdaGrad over the shuffled non-zero co-occurrence cells, weighting each
    squared residual by ``min(1, (x / x_max) ** alpha)``. Returns word plus
    context vectors; the per-epoch mean loss is kept in ``train_history``.
    Identical input and seed give bitwise-identical vectors.
    """
    token_lists = _token_lists(corpus)
    vocab = build_vocab(token_lists, config.min_count)
    if not vocab:
        raise ValueError("empty vocabulary after min_count filtering")
    rows, cols, vals = cooccurrence_table(token_lists, vocab, config.window)
    if len(vals) == 0:
        raise ValueError("no co-occurrences within the window")

    rng = np.random.default_rng(config.seed)
    V, d = len(vocab), config.dim
    W = (rng.random((V, d)) - 0.5) / d
    Wc = (rng.random((V, d)) - 0.5) / d
    b = (rng.random(V) - 0.5) / d
    bc = (rng.random(V) - 0.5) / d
    gW, gWc = np.ones((V, d)), np.ones((V, d))
    gb, gbc = np.ones(V), np.ones(V)

    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(vals)).astype(np.int64)
        cost = kernels.glove_epoch(rows, cols, vals, order, W, Wc, b, bc, gW, gWc, gb, gbc,
                                   float(config.x_max), float(config.alpha), float(config.learning_rate))
        if not math.isfinite(cost):
            raise FloatingPointError(f"training diverged at epoch {epoch + 1}")
        history.append(cost / len(vals))
        log.debug("epoch %d loss %.6f", epoch + 1, history[-1])

    store = EmbeddingStore(vocab, W + Wc)
    store.train_history = tuple(history)
    return store
