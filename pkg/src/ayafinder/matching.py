"""Verse detection in normalized text.

A sentence matches a verse when its token sequence is the whole verse
(full match) or a contiguous proper substring of it (fragment match).
Sentences shorter than a minimum token count are never matched; very
short pious phrases are too common to attribute to a specific verse.

Candidate lookup runs over an inverted index of token n-grams, so a
sentence only ever touches verses sharing its rarest n-gram. Results are
identical to a brute-force scan over all verses.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_min_tokens, check_text_sequence
from .corpus import Category, QuranCorpus, VerseRef
from .normalize import SENTENCE_DELIMITERS, split_sentences

__all__ = [
    "MatchKind",
    "MatchResult",
    "MatchList",
    "MatchIndex",
    "VerseMatcher",
    "build_index",
    "match_sentence",
    "extract_verses",
]

# Gram size of the eagerly built postings; queries shorter than this fall
# back to lazily built smaller grams.
_GRAM = 3


class MatchKind(str, Enum):
    FULL = "full"
    FRAGMENT = "fragment"


@dataclass(frozen=True)
class MatchResult:
    """One verse matched by one sentence.

    span is the half-open token range inside the verse where the
    sentence's tokens sit; a full match always has span (0, verse length).
    """

    verse: VerseRef
    kind: MatchKind
    sentence_index: int
    span: tuple[int, int]


@dataclass
class MatchList:
    """All matches found in one text plus the label multiset they imply.

    categories counts one occurrence per (match, label) pair, so a verse
    matched twice contributes its labels twice.
    """

    matches: list[MatchResult] = field(default_factory=list)
    categories: Counter = field(default_factory=Counter)

    @property
    def is_validated(self) -> bool:
        return bool(self.matches)

    def distinct_verses(self) -> set[VerseRef]:
        return {m.verse for m in self.matches}


class MatchIndex:
    """Read-only lookup structure over a corpus's normalized verses."""

    def __init__(self, corpus: QuranCorpus):
        self._refs: list[VerseRef] = []
        self._vid: dict[VerseRef, int] = {}
        self._tokens: list[tuple[str, ...]] = []
        self._cats: list[frozenset[Category]] = []
        self._full: dict[tuple[str, ...], list[int]] = {}
        for verse in corpus:
            vid = len(self._refs)
            self._refs.append(verse.ref)
            self._vid[verse.ref] = vid
            self._tokens.append(verse.norm_tokens)
            self._cats.append(verse.categories)
            self._full.setdefault(verse.norm_tokens, []).append(vid)
        self._grams: dict[int, dict[tuple[str, ...], list[tuple[int, int]]]] = {
            _GRAM: self._build_postings(_GRAM)
        }

    def _build_postings(self, n: int) -> dict[tuple[str, ...], list[tuple[int, int]]]:
        postings: dict[tuple[str, ...], list[tuple[int, int]]] = {}
        for vid, tokens in enumerate(self._tokens):
            for pos in range(len(tokens) - n + 1):
                postings.setdefault(tokens[pos : pos + n], []).append((vid, pos))
        return postings

    def _postings(self, n: int) -> dict[tuple[str, ...], list[tuple[int, int]]]:
        if n not in self._grams:
            self._grams[n] = self._build_postings(n)
        return self._grams[n]

    @property
    def verse_count(self) -> int:
        return len(self._refs)

    def tokens_of(self, ref: VerseRef) -> tuple[str, ...]:
        return self._tokens[self._vid[ref]]

    def categories_of(self, ref: VerseRef) -> frozenset[Category]:
        return self._cats[self._vid[ref]]

    def lookup_full(self, tokens: Sequence[str]) -> list[VerseRef]:
        """Verses whose entire normalized text equals these tokens."""
        return [self._refs[vid] for vid in self._full.get(tuple(tokens), ())]

    def lookup_containing(self, tokens: Sequence[str]) -> list[tuple[VerseRef, int]]:
        """Verses containing these tokens as a contiguous run.

        Returns (ref, first start position) pairs in corpus order. The
        query must not be empty. Queries shorter than the gram size use
        postings of their own length.
        """
        query = tuple(tokens)
        n = len(query)
        if n == 0:
            raise ValueError("empty query")
        g = min(_GRAM, n)
        postings = self._postings(g)
        # Every gram of the query must occur somewhere; pick the rarest
        # posting list and verify candidates against the full query.
        best_list: list[tuple[int, int]] | None = None
        best_off = 0
        for off in range(n - g + 1):
            plist = postings.get(query[off : off + g])
            if plist is None:
                return []
            if best_list is None or len(plist) < len(best_list):
                best_list, best_off = plist, off
        assert best_list is not None
        found: dict[int, int] = {}
        for vid, pos in best_list:
            start = pos - best_off
            if start < 0:
                continue
            vtokens = self._tokens[vid]
            if start + n > len(vtokens):
                continue
            if vtokens[start : start + n] == query:
                prev = found.get(vid)
                if prev is None or start < prev:
                    found[vid] = start
        return [(self._refs[vid], found[vid]) for vid in sorted(found)]


def build_index(corpus: QuranCorpus) -> MatchIndex:
    """Build the verse lookup index for a corpus."""
    return MatchIndex(corpus)


def match_sentence(
    index: MatchIndex,
    tokens: Sequence[str],
    sentence_index: int = 0,
    min_tokens: int = 3,
) -> list[MatchResult]:
    """Match one normalized sentence against the indexed verses.

    Sentences with fewer than min_tokens tokens return no matches. Every
    verse containing the sentence is reported: a full match when the
    sentence is the entire verse, a fragment otherwise. Results are in
    corpus order.
    """
    check_min_tokens(min_tokens)
    if len(tokens) < min_tokens:
        return []
    n = len(tokens)
    results = []
    for ref, start in index.lookup_containing(tokens):
        whole = start == 0 and n == len(index.tokens_of(ref))
        kind = MatchKind.FULL if whole else MatchKind.FRAGMENT
        results.append(MatchResult(ref, kind, sentence_index, (start, start + n)))
    return results


def extract_verses(
    index: MatchIndex,
    text: str,
    min_tokens: int = 3,
    delimiters: str = SENTENCE_DELIMITERS,
) -> MatchList:
    """Find all verse matches in one raw text.

    The text is sentence-split and normalized, each sentence is matched
    independently, and the per-match category labels are accumulated as a
    multiset. The same verse matched by two sentences appears twice.
    """
    normalized = split_sentences(text, delimiters)
    out = MatchList()
    for si, sentence in enumerate(normalized.sentences()):
        for match in match_sentence(index, sentence, si, min_tokens):
            out.matches.append(match)
            out.categories.update(index.categories_of(match.verse))
    return out


class VerseMatcher(BaseEstimator):
    """Estimator-style front end over the verse index.

    fit builds the index from a corpus; predict maps raw texts to their
    :class:`MatchList`. Stateless between fits.

    Parameters
    ----------
    min_tokens:
        Shortest sentence, in normalized tokens, eligible for matching.
        Must be at least 2; the default of 3 suppresses matches on very
        short common phrases.
    delimiters:
        Sentence boundary characters.
    """

    def __init__(self, min_tokens: int = 3, delimiters: str = SENTENCE_DELIMITERS):
        self.min_tokens = min_tokens
        self.delimiters = delimiters

    def fit(self, corpus: QuranCorpus, y=None):
        check_min_tokens(self.min_tokens)
        if not isinstance(corpus, QuranCorpus):
            raise TypeError(f"fit expects a QuranCorpus, got {type(corpus).__name__}")
        self.index_ = build_index(corpus)
        self.n_verses_ = self.index_.verse_count
        return self

    def predict(self, X) -> list[MatchList]:
        check_is_fitted(self, "index_")
        texts = check_text_sequence(X)
        return [
            extract_verses(self.index_, text, self.min_tokens, self.delimiters)
            for text in texts
        ]
