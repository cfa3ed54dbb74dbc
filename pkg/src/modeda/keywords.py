"""Per-label frequent keyword tables (the seed pool for class-aware insertion)."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from modeda.corpus import Corpus, StopwordList, EMPTY_STOPWORDS

__all__ = ["ClassKeywordTable", "build_class_keywords", "DEFAULT_TOP_M"]

DEFAULT_TOP_M = 100


@dataclass(frozen=True)
class ClassKeywordTable:
    table: Mapping[str, tuple]  # label -> ((keyword, count), ...) by count desc, word asc

    def __contains__(self, label) -> bool:
        return label in self.table

    def __getitem__(self, label) -> tuple:
        return self.table[label]

    def labels(self) -> list:
        return sorted(self.table)

    def keywords(self, label) -> list:
        return [w for w, _ in self.table[label]]

    def to_json(self) -> str:
        return json.dumps({lab: [[w, c] for w, c in self.table[lab]] for lab in self.labels()},
                          ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ClassKeywordTable":
        raw = json.loads(text)
        return cls({lab: tuple((w, int(c)) for w, c in pairs) for lab, pairs in raw.items()})

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def build_class_keywords(corpus: Corpus, stopwords: StopwordList = EMPTY_STOPWORDS,
                         top_m: int = DEFAULT_TOP_M) -> ClassKeywordTable:
    """Top ``top_m`` non-stopword tokens per label by raw token count."""
    if top_m < 1:
        raise ValueError("top_m must be positive")
    counts = {}
    for doc in corpus:
        if not doc.label:
            continue
        counter = counts.setdefault(doc.label, Counter())
        counter.update(t for t in doc.tokens if t not in stopwords)
    if not counts:
        raise ValueError("corpus has no labeled documents")
    table = {}
    for label, counter in counts.items():
        ranked = sorted(counter.items(), key=lambda wc: (-wc[1], wc[0]))
        table[label] = tuple(ranked[:top_m])
    return ClassKeywordTable(table)
