"""Quran reference corpus: loading, validation, and topic mapping.

The canonical input is the pipe-delimited verse-per-line layout
(``sura|ayah|text``); other line formats plug in through
:data:`CORPUS_FORMATS`. A loaded corpus is immutable and carries both the
raw verse text and its normalized token form.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import (
    CorpusIncomplete,
    DuplicateVerse,
    InvalidArtifact,
    MalformedLine,
    UnknownCategory,
    UnknownVerseRef,
)
from .normalize import normalize

logger = logging.getLogger(__name__)

__all__ = [
    "TOTAL_VERSES",
    "TOTAL_SURAS",
    "CORPUS_FORMATS",
    "Category",
    "parse_category",
    "VerseRef",
    "Verse",
    "QuranCorpus",
    "load_corpus",
    "load_categories",
    "category_counts",
    "save_corpus_artifact",
    "load_corpus_artifact",
    "corpus_content_hash",
]

TOTAL_VERSES = 6236
TOTAL_SURAS = 114


class Category(str, Enum):
    """Topic labels a verse can carry.

    General is reserved for verses absent from an expert mapping; mapping
    files may only assign the other thirteen.
    """

    HEREAFTER_UNSEENS = "HereafterUnseens"
    STORIES_OF_PROPHETS = "StoriesOfProphets"
    DISBELIEVERS = "Disbelievers"
    SHARIA_LAW = "ShariaLaw"
    JIHAD = "Jihad"
    UNIVERSE_CREATION = "UniverseCreation"
    WORSHIP = "Worship"
    BELIEF_BELIEVERS = "BeliefBelievers"
    ABOUT_QURAN = "AboutQuran"
    MUHAMMAD = "Muhammad"
    GOD = "God"
    SINS = "Sins"
    HUMAN_BEING = "HumanBeing"
    GENERAL = "General"


def _canonical_key(name: str) -> str:
    return re.sub(r"[^a-z]", "", name.lower())


_CATEGORY_LOOKUP = {_canonical_key(c.value): c for c in Category}


def parse_category(name: str) -> Category:
    """Resolve a label spelling to a Category.

    Spacing, case, and punctuation are ignored, so "Hereafter & Unseens"
    and "hereafterunseens" both resolve. Raises UnknownCategory for
    anything else.
    """
    cat = _CATEGORY_LOOKUP.get(_canonical_key(name))
    if cat is None:
        raise UnknownCategory(name)
    return cat


@dataclass(frozen=True, order=True)
class VerseRef:
    """A sura:ayah reference, 1-based on both axes."""

    sura: int
    ayah: int

    def __str__(self) -> str:
        return f"{self.sura}:{self.ayah}"


@dataclass(frozen=True)
class Verse:
    ref: VerseRef
    raw_text: str
    norm_tokens: tuple[str, ...]
    categories: frozenset[Category]


@dataclass(frozen=True)
class QuranCorpus:
    """Immutable verse collection keyed by reference."""

    verses: dict[VerseRef, Verse]
    by_sura: dict[int, tuple[Verse, ...]]

    @property
    def verse_count(self) -> int:
        return len(self.verses)

    @property
    def sura_count(self) -> int:
        return len(self.by_sura)

    def get(self, ref: VerseRef) -> Verse:
        try:
            return self.verses[ref]
        except KeyError:
            raise UnknownVerseRef(ref) from None

    def __iter__(self):
        return iter(self.verses.values())


def _parse_pipe_line(line: str) -> tuple[str, str, str] | None:
    parts = line.split("|", 2)
    if len(parts) != 3:
        return None
    return parts[0], parts[1], parts[2]


def _parse_tsv_line(line: str) -> tuple[str, str, str] | None:
    parts = line.split("\t", 2)
    if len(parts) != 3:
        return None
    return parts[0], parts[1], parts[2]


# Line parsers by format id. Each maps one content line to
# (sura, ayah, text) strings, or None when the line has the wrong shape.
CORPUS_FORMATS = {
    "pipe": _parse_pipe_line,
    "tanzil": _parse_pipe_line,
    "tsv": _parse_tsv_line,
}


def _assemble(entries: dict[VerseRef, Verse]) -> QuranCorpus:
    ordered = {ref: entries[ref] for ref in sorted(entries)}
    by_sura: dict[int, list[Verse]] = {}
    for verse in ordered.values():
        by_sura.setdefault(verse.ref.sura, []).append(verse)
    return QuranCorpus(ordered, {s: tuple(v) for s, v in by_sura.items()})


def _check_complete(entries: dict[VerseRef, Verse], allow_incomplete: bool) -> None:
    count = len(entries)
    problems = []
    if count != TOTAL_VERSES:
        problems.append(f"expected {TOTAL_VERSES}")
    suras = {ref.sura for ref in entries}
    if len(suras) != TOTAL_SURAS:
        problems.append(f"{len(suras)} suras, expected {TOTAL_SURAS}")
    for sura in suras:
        ayahs = sorted(ref.ayah for ref in entries if ref.sura == sura)
        if ayahs != list(range(1, len(ayahs) + 1)):
            problems.append(f"sura {sura} ayah numbering has gaps")
            break
    if not problems:
        return
    detail = "; ".join(problems)
    if allow_incomplete:
        logger.warning("corpus incomplete: found %d verses (%s)", count, detail)
        return
    raise CorpusIncomplete(count, detail)


def load_corpus(
    path: str | Path,
    corpus_format: str = "pipe",
    allow_incomplete: bool = False,
) -> QuranCorpus:
    """Load a verse file into a validated corpus.

    Blank lines and '#' comment lines are skipped. Every verse starts out
    categorized as General until a mapping is applied.

    Raises
    ------
    MalformedLine
        For an unparsable line, an out-of-range reference, or verse text
        that normalizes to nothing.
    DuplicateVerse
        When a reference appears twice.
    CorpusIncomplete
        When the file does not form the complete canonical text; pass
        allow_incomplete=True to downgrade this to a warning (intended
        for fixtures and excerpts).
    """
    parse = CORPUS_FORMATS.get(corpus_format)
    if parse is None:
        known = ", ".join(sorted(CORPUS_FORMATS))
        raise ValueError(f"unknown corpus format {corpus_format!r} (known: {known})")
    path = Path(path)
    entries: dict[VerseRef, Verse] = {}
    default_cats = frozenset({Category.GENERAL})
    with open(path, encoding="utf-8-sig") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parsed = parse(line)
            if parsed is None:
                raise MalformedLine(line_no, "wrong field count", str(path))
            sura_s, ayah_s, text = parsed
            try:
                sura, ayah = int(sura_s), int(ayah_s)
            except ValueError:
                raise MalformedLine(line_no, "non-numeric verse reference", str(path)) from None
            if not (1 <= sura <= TOTAL_SURAS) or ayah < 1:
                raise MalformedLine(line_no, f"reference {sura}:{ayah} out of range", str(path))
            ref = VerseRef(sura, ayah)
            if ref in entries:
                raise DuplicateVerse(ref)
            tokens = tuple(normalize(text).split())
            if not tokens:
                raise MalformedLine(line_no, "verse text normalizes to nothing", str(path))
            entries[ref] = Verse(ref, text, tokens, default_cats)
    _check_complete(entries, allow_incomplete)
    return _assemble(entries)


def load_categories(path: str | Path, corpus: QuranCorpus) -> QuranCorpus:
    """Apply an expert topic mapping, returning a re-labeled corpus.

    The file is CSV with rows ``sura,ayah,category[;category...]``. A
    header row is detected by the first cell not parsing as an integer.
    A label may carry a ``/subtopic`` suffix, which is dropped. Rows for
    the same verse accumulate. Every verse not named in the file ends up
    with exactly {General}.

    Raises UnknownVerseRef for rows outside the corpus, UnknownCategory
    for unknown labels and for explicit General rows (General cannot be
    assigned), and MalformedLine for rows with the wrong shape.
    """
    import csv

    path = Path(path)
    assigned: dict[VerseRef, set[Category]] = {}
    first_row = True
    with open(path, encoding="utf-8-sig", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not any(cell.strip() for cell in row):
                continue
            if first_row:
                first_row = False
                try:
                    int(row[0].strip())
                except ValueError:
                    continue  # header row
            if len(row) < 3:
                raise MalformedLine(line_no, "expected sura,ayah,categories", str(path))
            try:
                ref = VerseRef(int(row[0].strip()), int(row[1].strip()))
            except ValueError:
                raise MalformedLine(line_no, "non-numeric verse reference", str(path)) from None
            if ref not in corpus.verses:
                raise UnknownVerseRef(ref)
            labels = [p.strip() for p in row[2].split(";") if p.strip()]
            if not labels:
                raise MalformedLine(line_no, "empty category cell", str(path))
            for label in labels:
                cat = parse_category(label.split("/", 1)[0])
                if cat is Category.GENERAL:
                    raise UnknownCategory(label)
                assigned.setdefault(ref, set()).add(cat)
    default_cats = frozenset({Category.GENERAL})
    relabeled = {}
    for ref, verse in corpus.verses.items():
        cats = frozenset(assigned[ref]) if ref in assigned else default_cats
        relabeled[ref] = Verse(verse.ref, verse.raw_text, verse.norm_tokens, cats)
    return _assemble(relabeled)


def category_counts(corpus: QuranCorpus) -> dict[Category, tuple[int, float]]:
    """Verse count and percentage share per category, in declaration order.

    Labels are a multi-set: a verse with two categories counts once under
    each, so percentages can sum past 100.
    """
    total = corpus.verse_count
    counts = {cat: 0 for cat in Category}
    for verse in corpus:
        for cat in verse.categories:
            counts[cat] += 1
    return {cat: (n, 100.0 * n / total if total else 0.0) for cat, n in counts.items()}


# ---------------------------------------------------------------------------
# Serialized artifact
# ---------------------------------------------------------------------------

CORPUS_ARTIFACT_FORMAT = "quran-corpus-index/1"


def _corpus_payload(corpus: QuranCorpus) -> list[list]:
    return [
        [v.ref.sura, v.ref.ayah, v.raw_text, sorted(c.value for c in v.categories)]
        for v in corpus
    ]


def _payload_hash(payload: list[list]) -> str:
    blob = json.dumps(payload, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def corpus_content_hash(corpus: QuranCorpus) -> str:
    """Stable content hash over references, raw text, and labels."""
    return _payload_hash(_corpus_payload(corpus))


def save_corpus_artifact(corpus: QuranCorpus, path: str | Path) -> str:
    """Write the corpus as a self-verifying JSON artifact; returns its hash."""
    payload = _corpus_payload(corpus)
    digest = _payload_hash(payload)
    doc = {"format": CORPUS_ARTIFACT_FORMAT, "sha256": digest, "verses": payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")
    return digest


def load_corpus_artifact(path: str | Path) -> QuranCorpus:
    """Load a corpus artifact written by :func:`save_corpus_artifact`.

    Verifies the format marker and the content hash; raises
    InvalidArtifact when either check fails. Completeness is not
    re-checked here, so fixture-sized artifacts load as they were built.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvalidArtifact(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != CORPUS_ARTIFACT_FORMAT:
        raise InvalidArtifact(f"{path}: missing format marker {CORPUS_ARTIFACT_FORMAT!r}")
    payload = doc.get("verses")
    if not isinstance(payload, list):
        raise InvalidArtifact(f"{path}: verse payload missing")
    if _payload_hash(payload) != doc.get("sha256"):
        raise InvalidArtifact(f"{path}: content hash mismatch")
    entries: dict[VerseRef, Verse] = {}
    for item in payload:
        try:
            sura, ayah, raw_text, cat_names = item
            ref = VerseRef(int(sura), int(ayah))
            cats = frozenset(Category(name) for name in cat_names)
        except (TypeError, ValueError) as exc:
            raise InvalidArtifact(f"{path}: bad verse entry {item!r}") from exc
        if ref in entries:
            raise InvalidArtifact(f"{path}: duplicate reference {ref}")
        tokens = tuple(normalize(raw_text).split())
        if not tokens:
            raise InvalidArtifact(f"{path}: verse {ref} normalizes to nothing")
        entries[ref] = Verse(ref, raw_text, tokens, cats)
    if not entries:
        raise InvalidArtifact(f"{path}: empty corpus")
    return _assemble(entries)
