"""Featurization and a multinomial logistic-regression classifier.

A fixed, deterministic linear learner: enough to measure whether
augmentation helps, without any pre-trained sentence encoder.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from modeda import kernels
from modeda.corpus import Corpus, Document
from modeda.embeddings import EmbeddingStore

__all__ = [
    "FEATURE_MODES",
    "FeatureSpec",
    "TrainConfig",
    "LinearModel",
    "build_feature_spec",
    "featurize",
    "featurize_corpus",
    "softmax",
    "loss_and_gradient",
    "train",
    "predict",
    "predict_corpus",
    "save_model",
    "load_model",
]

FEATURE_MODES = ("bow", "avg_embedding")


@dataclass(frozen=True)
class FeatureSpec:
    mode: str
    dim: int
    vocabulary: tuple = ()  # bow only

    def __post_init__(self):
        if self.mode not in FEATURE_MODES:
            raise ValueError(f"feature mode must be one of {FEATURE_MODES}")

    def to_dict(self) -> dict:
        return {"mode": self.mode, "dim": self.dim, "vocabulary": list(self.vocabulary)}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        return cls(d["mode"], int(d["dim"]), tuple(d.get("vocabulary", ())))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0 or self.epochs < 1 or self.batch_size < 1 or self.l2 < 0:
            raise ValueError("invalid training configuration")


@dataclass
class LinearModel:
    weights: np.ndarray  # (C, d)
    bias: np.ndarray  # (C,)
    classes: tuple
    feature_spec: FeatureSpec
    history: list = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        self.classes = tuple(self.classes)
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("duplicate class labels")
        if self.weights.shape != (len(self.classes), self.feature_spec.dim) or self.bias.shape != (len(self.classes),):
            raise ValueError("parameter shapes do not match classes and feature dim")

    def logits(self, X) -> np.ndarray:
        return X @ self.weights.T + self.bias


def build_feature_spec(corpus: Corpus, mode: str, store: Optional[EmbeddingStore] = None) -> FeatureSpec:
    if mode == "avg_embedding":
        if store is None:
            raise ValueError("avg_embedding features need an embedding store")
        return FeatureSpec(mode, store.dim)
    vocab = tuple(sorted({t for d in corpus for t in d.tokens}))
    return FeatureSpec("bow", len(vocab), vocab)


def featurize(doc: Document, store: Optional[EmbeddingStore], spec: FeatureSpec) -> np.ndarray:
    """Mean of in-vocabulary token vectors, or token counts over the frozen vocabulary."""
    return featurize_corpus([doc], store, spec)[0]


def featurize_corpus(docs: Sequence[Document], store: Optional[EmbeddingStore], spec: FeatureSpec) -> np.ndarray:
    X = np.zeros((len(docs), spec.dim))
    if spec.mode == "avg_embedding":
        if store is None:
            raise ValueError("avg_embedding features need an embedding store")
        if store.dim != spec.dim:
            raise ValueError("embedding dim does not match the feature spec")
        for r, doc in enumerate(docs):
            rows = [store.index(t) for t in doc.tokens if t in store]
            if rows:
                X[r] = store.vectors[rows].mean(axis=0)
    else:
        index = {w: i for i, w in enumerate(spec.vocabulary)}
        for r, doc in enumerate(docs):
            for t in doc.tokens:
                i = index.get(t)
                if i is not None:
                    X[r, i] += 1.0
    return X


def _csr_features(docs, store, spec):
    # bow rows are very sparse; dense embedding rows are stored with every column
    if spec.mode == "avg_embedding":
        X = featurize_corpus(docs, store, spec)
        nz = [np.flatnonzero(row) for row in X]
        indptr = np.concatenate([[0], np.cumsum([len(c) for c in nz])]).astype(np.int64)
        indices = np.concatenate(nz + [np.zeros(0, np.int64)]).astype(np.int64)
        data = X[np.repeat(np.arange(len(docs)), np.diff(indptr)), indices]
        return indptr, indices, np.ascontiguousarray(data, dtype=np.float64)
    index = {w: i for i, w in enumerate(spec.vocabulary)}
    indptr, indices, data = [0], [], []
    for doc in docs:
        counts = {}
        for t in doc.tokens:
            i = index.get(t)
            if i is not None:
                counts[i] = counts.get(i, 0.0) + 1.0
        for i in sorted(counts):
            indices.append(i)
            data.append(counts[i])
        indptr.append(len(indices))
    return (np.array(indptr, dtype=np.int64), np.array(indices, dtype=np.int64),
            np.array(data, dtype=np.float64))


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=-1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=-1, keepdims=True)


def loss_and_gradient(model: LinearModel, X: np.ndarray, y: np.ndarray, l2: float = 0.0):
    """Mean cross-entropy plus ``l2/2 * ||W||^2`` and its gradient.

    ``y`` holds class indices, or a (n, C) matrix of target distributions.
    Returns ``(loss, grad_W, grad_b)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    Z = model.logits(X)
    Zs = Z - Z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(Zs).sum(axis=1, keepdims=True))
    log_p = Zs - log_norm
    y = np.asarray(y)
    if y.ndim == 1:
        T = np.zeros_like(Z)
        T[np.arange(n), y] = 1.0
    else:
        T = y.astype(np.float64)
    loss = -(T * log_p).sum() / n + 0.5 * l2 * float((model.weights ** 2).sum())
    R = np.exp(log_p) - T
    grad_W = R.T @ X / n + l2 * model.weights
    grad_b = R.mean(axis=0)
    return float(loss), grad_W, grad_b


def train(corpus: Corpus, store: Optional[EmbeddingStore] = None, mode: str = "bow",
          config: TrainConfig = TrainConfig(), spec: Optional[FeatureSpec] = None) -> LinearModel:
    """Mini-batch gradient descent from zero weights, shuffled by ``config.seed``.

    ``model.history`` holds the full-data objective after each epoch.
    """
    docs = list(corpus)
    if any(not d.label for d in docs):
        raise ValueError("every training document needs a label")
    classes = tuple(sorted({d.label for d in docs}))
    if len(classes) < 2:
        raise ValueError("need at least two classes to train")
    if spec is None:
        spec = build_feature_spec(corpus, mode, store)
    indptr, indices, data = _csr_features(docs, store, spec)
    cls_index = {c: i for i, c in enumerate(classes)}
    y = np.array([cls_index[d.label] for d in docs], dtype=np.int64)

    model = LinearModel(np.zeros((len(classes), spec.dim)), np.zeros(len(classes)), classes, spec)
    rng = np.random.default_rng(config.seed)
    n = len(docs)
    for _ in range(config.epochs):
        perm = rng.permutation(n).astype(np.int64)
        kernels.softmax_sgd_epoch(indptr, indices, data, y, perm, model.weights, model.bias,
                                  config.learning_rate, config.l2, config.batch_size)
        loss = kernels.softmax_objective(indptr, indices, data, y, model.weights, model.bias, config.l2)
        if not np.isfinite(loss):
            raise FloatingPointError("training diverged; lower the learning rate")
        model.history.append(float(loss))
    return model


def predict(model: LinearModel, features) -> tuple:
    """``(label, probabilities)``; ties go to the lowest class index."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.feature_spec.dim,):
        raise ValueError(f"expected {model.feature_spec.dim} features, got shape {x.shape}")
    p = softmax(model.logits(x[None, :]))[0]
    return model.classes[int(np.argmax(p))], p


def predict_corpus(model: LinearModel, docs: Sequence[Document], store: Optional[EmbeddingStore] = None) -> list:
    if not docs:
        return []
    X = featurize_corpus(docs, store, model.feature_spec)
    return [model.classes[i] for i in np.argmax(model.logits(X), axis=1)]


def save_model(model: LinearModel, path) -> None:
    payload = {
        "classes": list(model.classes),
        "feature_spec": model.feature_spec.to_dict(),
        "weights": model.weights.ravel().tolist(),
        "bias": model.bias.tolist(),
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_model(path) -> LinearModel:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    spec = FeatureSpec.from_dict(d["feature_spec"])
    C = len(d["classes"])
    W = np.array(d["weights"], dtype=np.float64).reshape(C, spec.dim)
    return LinearModel(W, np.array(d["bias"], dtype=np.float64), tuple(d["classes"]), spec)
