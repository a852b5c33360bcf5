"""Arabic text normalization and sentence splitting.

Verse text and tweet text are folded into one normalized space before any
comparison. The folding removes optional marks, unifies letter variants,
and drops mention/hashtag tokens. There is no stemming and no stop-word
removal, so downstream matching stays exact at the word level.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_text_sequence

__all__ = [
    "SENTENCE_DELIMITERS",
    "NormalizedText",
    "ArabicNormalizer",
    "normalize",
    "tokenize",
    "split_sentences",
]

# Combining marks stripped from text. Tashkeel (U+064B..U+065F) and the
# superscript alef are the optional vowel marks; U+0610..U+061A carries
# honorific signs; U+06D6..U+06ED holds the recitation marks that
# Uthmani-script quotes embed. Tatweel is a purely visual stretch.
_STRIPPED_RANGES = (
    (0x0610, 0x061A),  # Arabic honorific and combining signs
    (0x064B, 0x065F),  # tanween, harakat, shadda, sukun
    (0x0670, 0x0670),  # superscript alef
    (0x06D6, 0x06ED),  # recitation and waqf marks
    (0x0640, 0x0640),  # tatweel (kashida)
)

# Zero-width and bidi control characters are invisible but break token
# equality; social media text is full of them.
_CONTROL_CHARS = (
    "​‌‍‎‏"  # zero-width space/joiners, LRM, RLM
    "‪‫‬‭‮"  # bidi embedding controls
    "⁠⁦⁧⁨⁩"  # word joiner, bidi isolates
    "﻿"                          # zero-width no-break space
)

# Letter variant folding: alif forms to bare alif, hamza carriers to bare
# hamza, ta marbuta to ha, alif maqsura to ya.
_LETTER_MAP = {
    "آ": "ا",  # آ -> ا
    "أ": "ا",  # أ -> ا
    "إ": "ا",  # إ -> ا
    "ٱ": "ا",  # ٱ (alif wasla) -> ا
    "ؤ": "ء",  # ؤ -> ء
    "ئ": "ء",  # ئ -> ء
    "ة": "ه",  # ة -> ه
    "ى": "ي",  # ى -> ي
}


def _build_norm_table() -> dict[int, str | None]:
    table: dict[int, str | None] = {}
    for lo, hi in _STRIPPED_RANGES:
        for cp in range(lo, hi + 1):
            table[cp] = None
    for ch in _CONTROL_CHARS:
        table[ord(ch)] = None
    for src, dst in _LETTER_MAP.items():
        table[ord(src)] = dst
    return table


def _build_fold_table() -> dict[int, str]:
    # Arabic presentation forms (ligatures, positional glyph variants)
    # NFKC-fold to their base letter sequences. Folding is restricted to
    # these two blocks; everything else passes through untouched.
    table: dict[int, str] = {}
    for lo, hi in ((0xFB50, 0xFDFF), (0xFE70, 0xFEFF)):
        for cp in range(lo, hi + 1):
            ch = chr(cp)
            folded = unicodedata.normalize("NFKC", ch)
            if folded != ch:
                table[cp] = folded
    # U+FDFD carries no compatibility decomposition even though it spells
    # out a full phrase; expand it by hand so single-glyph quotes match.
    table[0xFDFD] = "بسم الله الرحمن الرحيم"  # بسم الله الرحمن الرحيم
    return table


_NORM_TABLE = _build_norm_table()
_FOLD_TABLE = _build_fold_table()

# Whole mention/hashtag tokens are dropped, not just the marker.
_MENTION_OR_HASHTAG = re.compile(r"[@#]\S*")

# Default sentence boundary characters. The colon is included because
# quotation prefixes ("... said:") splice a verse onto the same line.
SENTENCE_DELIMITERS = ".,:;،؛؟!?…()[]{}«»\"‘’“”\n\r"


def normalize(raw: str) -> str:
    """Fold raw text into normalized matching space.

    Total function: any string maps to a (possibly empty) normalized
    string with single spaces between tokens.
    """
    text = raw.translate(_FOLD_TABLE)
    text = _MENTION_OR_HASHTAG.sub(" ", text)
    text = text.translate(_NORM_TABLE)
    return " ".join(text.split())


def tokenize(raw: str) -> list[str]:
    """Normalized whitespace tokens of raw text."""
    return normalize(raw).split()


@dataclass(frozen=True)
class NormalizedText:
    """Normalized token stream plus sentence boundaries.

    sentence_bounds holds half-open [start, end) index pairs into tokens;
    spans are non-overlapping, ordered, and cover every token.
    """

    tokens: tuple[str, ...]
    sentence_bounds: tuple[tuple[int, int], ...]

    @property
    def sentence_count(self) -> int:
        return len(self.sentence_bounds)

    def sentences(self) -> Iterator[tuple[str, ...]]:
        for start, end in self.sentence_bounds:
            yield self.tokens[start:end]


@lru_cache(maxsize=16)
def _delimiter_pattern(delimiters: str) -> re.Pattern[str]:
    return re.compile("[" + re.escape(delimiters) + "]+")


def split_sentences(raw: str, delimiters: str = SENTENCE_DELIMITERS) -> NormalizedText:
    """Split raw text on delimiter runs, then normalize each chunk.

    Chunks that normalize to nothing produce no sentence, so the result
    never contains an empty sentence.
    """
    tokens: list[str] = []
    bounds: list[tuple[int, int]] = []
    for chunk in _delimiter_pattern(delimiters).split(raw):
        words = normalize(chunk).split()
        if not words:
            continue
        start = len(tokens)
        tokens.extend(words)
        bounds.append((start, len(tokens)))
    return NormalizedText(tuple(tokens), tuple(bounds))


class ArabicNormalizer(TransformerMixin, BaseEstimator):
    """Stateless transformer applying :func:`normalize` to string batches.

    Exists so the normalization step can sit inside scikit-learn style
    compositions; fit is a no-op.

    Parameters
    ----------
    delimiters:
        Sentence boundary characters used by :meth:`split`.
    """

    def __init__(self, delimiters: str = SENTENCE_DELIMITERS):
        self.delimiters = delimiters

    def fit(self, X, y=None):
        check_text_sequence(X)
        return self

    def transform(self, X) -> list[str]:
        return [normalize(text) for text in check_text_sequence(X)]

    def split(self, X) -> list[NormalizedText]:
        """Sentence-split each input text."""
        return [split_sentences(text, self.delimiters) for text in check_text_sequence(X)]
