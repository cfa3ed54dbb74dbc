"""Paths to the data files shipped inside the package."""

from __future__ import annotations

import functools
from importlib import resources
from pathlib import Path

VECTORS = "rt_glove50.txt"
LEXICON = "AFINN-111.txt"
STOPWORDS = "stopwords_en.txt"
SYNONYMS = "synonyms_wordnet.tsv"
RT_TRAIN = "rt_train.tsv"
RT_HELDOUT = "rt_heldout.tsv"


def path(name: str) -> Path:
    # the package is always installed unzipped, so the traversable is a real path
    return Path(str(resources.files("modeda") / "data" / name))


@functools.lru_cache(maxsize=None)
def vectors():
    from modeda.embeddings import load_vectors

    return load_vectors(path(VECTORS))


@functools.lru_cache(maxsize=None)
def synonyms():
    from modeda.augment import load_synonyms

    return load_synonyms(path(SYNONYMS))


def rt_corpus(split: str = "train", **kwargs):
    """The bundled 500-sentence Rotten Tomatoes train or heldout subset."""
    from modeda.corpus import load_corpus

    name = {"train": RT_TRAIN, "heldout": RT_HELDOUT}[split]
    return load_corpus(path(name), "tsv", **kwargs)
