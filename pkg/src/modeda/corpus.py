"""Corpus loading, tweet-style cleaning and tokenization."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

__all__ = [
    "Document",
    "Corpus",
    "StopwordList",
    "CorpusFormatError",
    "clean_text",
    "tokenize",
    "make_document",
    "load_corpus",
    "save_corpus",
    "load_stopwords",
    "default_stopwords",
    "merge_annotations",
]

_URL_RE = re.compile(r"(?:https?://|www\.)\S*")
_MENTION_RE = re.compile(r"@\w+")
# anything that is not a letter, digit, whitespace or apostrophe; `_` is a \w char so it is listed explicitly
_SYMBOL_RE = re.compile(r"[^\w\s']|_")
_REPEAT_RE = re.compile(r"(.)\1{3,}", re.DOTALL)
_SPACE_RE = re.compile(r"\s+")


class CorpusFormatError(ValueError):
    """Raised when a corpus, stopword or annotation file cannot be parsed."""


@dataclass(frozen=True)
class StopwordList:
    words: frozenset

    def __post_init__(self):
        for w in self.words:
            if w != w.lower() or not w or any(c.isspace() for c in w):
                raise ValueError(f"invalid stopword entry {w!r}")

    def __contains__(self, word) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_iterable(cls, words: Iterable[str]) -> "StopwordList":
        return cls(frozenset(words))


EMPTY_STOPWORDS = StopwordList(frozenset())


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    clean_text: str
    tokens: tuple
    label: Optional[str] = None


@dataclass(frozen=True)
class Corpus:
    documents: tuple
    label_set: frozenset = field(default=frozenset())

    def __post_init__(self):
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        ids = [d.id for d in docs]
        if len(set(ids)) != len(ids):
            dup = next(i for i, c in Counter(ids).items() if c > 1)
            raise ValueError(f"duplicate document id {dup!r}")
        labels = frozenset(d.label for d in docs if d.label)
        object.__setattr__(self, "label_set", labels)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]

    def by_id(self) -> dict:
        return {d.id: d for d in self.documents}

    def subset(self, ids: Iterable[str]) -> "Corpus":
        """Documents whose id is in ``ids``, in ``ids`` order."""
        index = self.by_id()
        return Corpus(tuple(index[i] for i in ids))

    def labels(self) -> list:
        return sorted(self.label_set)


def clean_text(raw: str) -> str:
    """Normalize a tweet or sentence for augmentation.

    Lowercases, drops URLs and @-mentions, keeps hashtag words without the
    ``#``, strips every symbol except apostrophes, squeezes any character
    repeated more than three times down to three, and collapses whitespace.
    """
    text = raw.lower()
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = text.replace("#", " ")
    text = _SYMBOL_RE.sub("", text)
    text = _REPEAT_RE.sub(lambda m: m.group(1) * 3, text)
    return _SPACE_RE.sub(" ", text).strip()


def tokenize(text: str, stopwords: StopwordList = EMPTY_STOPWORDS, drop_stopwords: bool = True) -> list:
    tokens = text.split()
    if drop_stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


def make_document(doc_id: str, raw_text: str, label: Optional[str] = None,
                  stopwords: StopwordList = EMPTY_STOPWORDS, drop_stopwords: bool = True) -> Document:
    cleaned = clean_text(raw_text)
    return Document(
        id=doc_id,
        raw_text=raw_text,
        clean_text=cleaned,
        tokens=tuple(tokenize(cleaned, stopwords, drop_stopwords)),
        label=label or None,
    )


def _synth_id(row: int) -> str:
    return f"{row:06d}"


def load_corpus(path, format: str = "tsv", stopwords: StopwordList = None,
                drop_stopwords: bool = True) -> Corpus:
    """Read a ``label<TAB>text`` TSV or a JSONL corpus.

    Records missing an id get the zero-padded 1-based row number. Bytes that
    are not valid UTF-8 are dropped.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    if format not in ("tsv", "jsonl"):
        raise ValueError(f"unknown corpus format {format!r}")
    path = Path(path)
    text = path.read_bytes().decode("utf-8", errors="ignore")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not any(line.strip() for line in lines):
        raise CorpusFormatError(f"{path}: empty corpus file")

    docs = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r")
        if not line.strip():
            raise CorpusFormatError(f"{path}:{lineno}: blank record")
        if format == "tsv":
            if "\t" not in line:
                raise CorpusFormatError(f"{path}:{lineno}: expected 'label<TAB>text'")
            label, raw = line.split("\t", 1)
            doc_id = _synth_id(lineno)
        else:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                raise CorpusFormatError(f"{path}:{lineno}: record needs a string 'text' field")
            raw = obj["text"]
            label = obj.get("label")
            doc_id = obj.get("id")
            if label is not None and not isinstance(label, str):
                raise CorpusFormatError(f"{path}:{lineno}: 'label' must be a string")
            if doc_id is None:
                doc_id = _synth_id(lineno)
            elif not isinstance(doc_id, str):
                raise CorpusFormatError(f"{path}:{lineno}: 'id' must be a string")
        if not raw.strip():
            raise CorpusFormatError(f"{path}:{lineno}: empty text")
        docs.append(make_document(doc_id, raw, label, stopwords, drop_stopwords))
    try:
        return Corpus(tuple(docs))
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from None


def save_corpus(corpus: Corpus, path, format: str = "tsv") -> None:
    """Write ``corpus`` so that :func:`load_corpus` reads it back unchanged.

    TSV carries no ids, so only corpora whose ids are the synthesized row
    numbers survive a TSV round trip; use JSONL otherwise.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus:
            if format == "tsv":
                if any(c in doc.raw_text for c in "\t\n\r") or (doc.label and "\t" in doc.label):
                    raise ValueError(f"document {doc.id!r} cannot be stored as TSV")
                fh.write(f"{doc.label or ''}\t{doc.raw_text}\n")
            elif format == "jsonl":
                rec = {"id": doc.id, "text": doc.raw_text}
                if doc.label is not None:
                    rec["label"] = doc.label
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            else:
                raise ValueError(f"unknown corpus format {format!r}")


def load_stopwords(path) -> StopwordList:
    words = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        w = line.strip()
        if not w:
            continue
        if w != w.lower() or any(c.isspace() for c in w):
            raise CorpusFormatError(f"{path}:{lineno}: stopwords must be single lowercase words")
        words.append(w)
    return StopwordList.from_iterable(words)


_DEFAULT_STOPWORDS = None


def default_stopwords() -> StopwordList:
    """The bundled English stopword list (179 words)."""
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        ref = resources.files("modeda") / "data" / "stopwords_en.txt"
        with resources.as_file(ref) as p:
            _DEFAULT_STOPWORDS = load_stopwords(p)
    return _DEFAULT_STOPWORDS


def merge_annotations(labels: Sequence[str]) -> Optional[str]:
    """Majority label among annotators, or ``None`` without a strict majority."""
    if len(labels) < 2:
        raise ValueError("need at least two annotator labels")
    label, count = Counter(labels).most_common(1)[0]
    return label if count * 2 > len(labels) else None
