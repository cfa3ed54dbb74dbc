"""AFINN-style polarity lookup for words and token sequences."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "SentimentLexicon",
    "LexiconFormatError",
    "load_lexicon",
    "default_lexicon",
    "word_polarity",
    "sentence_polarity",
]

log = logging.getLogger(__name__)

MIN_SCORE, MAX_SCORE = -5, 5


class LexiconFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SentimentLexicon:
    scores: Mapping[str, int]
    skipped_phrases: int = field(default=0, compare=False)

    def __post_init__(self):
        for word, score in self.scores.items():
            if word != word.lower():
                raise ValueError(f"lexicon keys must be lowercase: {word!r}")
            if not MIN_SCORE <= score <= MAX_SCORE:
                raise ValueError(f"score for {word!r} outside [-5, 5]: {score}")

    def __len__(self) -> int:
        return len(self.scores)

    def __contains__(self, word) -> bool:
        return word in self.scores

    def polarity(self, word: str) -> float:
        return float(self.scores.get(word, 0))


def load_lexicon(path) -> SentimentLexicon:
    """Parse an AFINN ``word<TAB>score`` file.

    Multi-word entries ("can't stand") cannot match single tokens and are
    skipped; the number skipped is kept on the lexicon and logged.
    """
    scores = {}
    skipped = 0
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\r").split("\t")
        if len(parts) != 2:
            raise LexiconFormatError(f"{path}:{lineno}: expected 'word<TAB>score'")
        word, raw_score = parts[0].strip().lower(), parts[1].strip()
        try:
            score = int(raw_score)
        except ValueError:
            raise LexiconFormatError(f"{path}:{lineno}: non-integer score {raw_score!r}") from None
        if not MIN_SCORE <= score <= MAX_SCORE:
            raise LexiconFormatError(f"{path}:{lineno}: score {score} outside [-5, 5]")
        if " " in word:
            skipped += 1
            continue
        scores[word] = score
    if skipped:
        log.info("%s: skipped %d multi-word entries", path, skipped)
    return SentimentLexicon(scores, skipped)


_DEFAULT = None


def default_lexicon() -> SentimentLexicon:
    """AFINN-111 as shipped with the package."""
    global _DEFAULT
    if _DEFAULT is None:
        ref = resources.files("modeda") / "data" / "AFINN-111.txt"
        with resources.as_file(ref) as p:
            _DEFAULT = load_lexicon(p)
    return _DEFAULT


def word_polarity(lex: SentimentLexicon, word: str) -> float:
    return lex.polarity(word)


def sentence_polarity(lex: SentimentLexicon, tokens: Iterable[str]) -> float:
    # sum rather than mean: keeps polarity additive over concatenation
    return float(sum(lex.scores.get(t, 0) for t in tokens))
