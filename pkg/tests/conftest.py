import random

import numpy as np
import pytest

from modeda.corpus import Corpus, StopwordList, make_document
from modeda.embeddings import EmbeddingStore
from modeda.keywords import build_class_keywords
from modeda.sentiment import SentimentLexicon


def random_store(n_words, dim, seed=0, prefix="w"):
    rng = np.random.default_rng(seed)
    vocab = [f"{prefix}{i:05d}" for i in range(n_words)]
    return EmbeddingStore(vocab, rng.standard_normal((n_words, dim)))


def random_corpus(store, n_docs, seed=0, labels=("pos", "neg"), min_len=3, max_len=15, oov_rate=0.1):
    rng = random.Random(seed)
    docs = []
    for i in range(n_docs):
        words = []
        for _ in range(rng.randint(min_len, max_len)):
            if rng.random() < oov_rate:
                words.append(f"oov{rng.randrange(50)}")
            else:
                words.append(store.vocab[rng.randrange(len(store))])
        docs.append(make_document(f"d{i:05d}", " ".join(words), labels[i % len(labels)]))
    return Corpus(tuple(docs))


def random_lexicon(store, seed=0, frac=0.3):
    rng = random.Random(seed)
    return SentimentLexicon({w: rng.randint(-5, 5) for w in store.vocab if rng.random() < frac})


@pytest.fixture(scope="session")
def small_store():
    return random_store(300, 16, seed=1)


@pytest.fixture(scope="session")
def small_lexicon(small_store):
    return random_lexicon(small_store, seed=2)


@pytest.fixture(scope="session")
def small_corpus(small_store):
    return random_corpus(small_store, 60, seed=3)


@pytest.fixture(scope="session")
def small_table(small_corpus):
    return build_class_keywords(small_corpus, StopwordList(frozenset()), top_m=30)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
