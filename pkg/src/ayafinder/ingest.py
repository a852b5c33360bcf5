"""Tweet record ingestion and dataset partitioning.

Records arrive as JSON lines. A lightweight schema check runs per line;
bad lines are skipped with a warning by default or abort the read in
strict mode. Downstream steps split the validated tweets into
human-authored and app-generated sides and fold explicit retweet records
into their parent's engagement counter.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .errors import SchemaViolation
from .matching import MatchIndex, extract_verses
from .normalize import split_sentences

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_KEY_PHRASES",
    "DEFAULT_APP_REGISTRY",
    "TweetRecord",
    "KeyPhraseSet",
    "SideStats",
    "DatasetPartition",
    "parse_record",
    "read_records",
    "keyphrase_filter",
    "hashtag_filter",
    "load_key_phrases",
    "load_app_registry",
    "detect_app_tweet",
    "fold_retweets",
    "partition",
    "partition_with_counts",
]

# Quotation formulas that introduce scripture in Arabic posts. The
# pre-filter keeps any tweet containing one of these after normalization.
DEFAULT_KEY_PHRASES = (
    "بسم الله الرحمن الرحيم",
    "صدق الله العظيم",
    "قوله تعالى",
    "قال تعالى",
    "قال المولى",
    "قال عز وجل",
    "قال في كتابه",
)

# Client identifiers of known auto-posting religious apps; matching is a
# case-insensitive substring test against the record's source field.
DEFAULT_APP_REGISTRY = ("du3a", "zad-muslim", "alathkar")


@dataclass(frozen=True)
class TweetRecord:
    """One ingested post.

    retweet_count is the platform counter at capture time; retweet_of
    links an explicit retweet record to its parent's id.
    """

    id: str
    text: str
    author_id: str
    author_name: str = ""
    followers: int = 0
    retweet_count: int = 0
    source: str = ""
    created_at: str = ""
    retweet_of: str | None = None

    @property
    def volume(self) -> int:
        """Tweet volume weight: the post plus its retweets."""
        return 1 + self.retweet_count


def _require_str(obj: dict, key: str, line_no: int, default: str | None = None) -> str:
    if key not in obj:
        if default is None:
            raise SchemaViolation(line_no, key, "missing")
        return default
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaViolation(line_no, key, f"expected string, got {type(value).__name__}")
    return value


def _require_count(obj: dict, key: str, line_no: int) -> int:
    value = obj.get(key, 0)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(line_no, key, f"expected integer, got {type(value).__name__}")
    if value < 0:
        raise SchemaViolation(line_no, key, "negative count")
    return value


def parse_record(obj, line_no: int = 0) -> TweetRecord:
    """Validate one decoded JSON object into a TweetRecord."""
    if not isinstance(obj, dict):
        raise SchemaViolation(line_no, "record", "not a JSON object")
    rec_id = _require_str(obj, "id", line_no)
    if not rec_id:
        raise SchemaViolation(line_no, "id", "empty")
    text = _require_str(obj, "text", line_no)
    author_id = _require_str(obj, "author_id", line_no)
    if not author_id:
        raise SchemaViolation(line_no, "author_id", "empty")
    retweet_of = obj.get("retweet_of")
    if retweet_of is not None and not isinstance(retweet_of, str):
        raise SchemaViolation(line_no, "retweet_of", "expected string or null")
    return TweetRecord(
        id=rec_id,
        text=text,
        author_id=author_id,
        author_name=_require_str(obj, "author_name", line_no, default=""),
        followers=_require_count(obj, "followers", line_no),
        retweet_count=_require_count(obj, "retweet_count", line_no),
        source=_require_str(obj, "source", line_no, default=""),
        created_at=_require_str(obj, "created_at", line_no, default=""),
        retweet_of=retweet_of or None,
    )


def read_records(
    path: str | Path,
    strict: bool = False,
    on_skip: Callable[[int, Exception], None] | None = None,
) -> Iterator[TweetRecord]:
    """Stream TweetRecords from a JSON-lines file.

    Blank lines are ignored. A line that fails to decode or violates the
    schema raises in strict mode; otherwise it is skipped, logged, and
    reported to on_skip when given.
    """
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaViolation(line_no, "record", f"invalid JSON: {exc.msg}") from exc
                yield parse_record(obj, line_no)
            except SchemaViolation as exc:
                if strict:
                    raise
                logger.warning("%s: skipping %s", path, exc)
                if on_skip is not None:
                    on_skip(line_no, exc)


def _contains_run(haystack: tuple[str, ...], needle: tuple[str, ...]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    first = needle[0]
    for i in range(len(haystack) - n + 1):
        if haystack[i] == first and haystack[i : i + n] == needle:
            return True
    return False


class KeyPhraseSet:
    """Normalized key phrases tested as contiguous token runs per sentence."""

    def __init__(self, phrases: Iterable[str] = DEFAULT_KEY_PHRASES):
        seen = []
        for phrase in phrases:
            tokens = tuple(split_sentences(phrase).tokens)
            if tokens and tokens not in seen:
                seen.append(tokens)
        self.phrases: tuple[tuple[str, ...], ...] = tuple(seen)

    def __len__(self) -> int:
        return len(self.phrases)

    def matches(self, text: str) -> bool:
        """True when any phrase occurs inside a single sentence of text."""
        if not self.phrases:
            return False
        for sentence in split_sentences(text).sentences():
            for phrase in self.phrases:
                if _contains_run(sentence, phrase):
                    return True
        return False


def load_key_phrases(path: str | Path) -> KeyPhraseSet:
    """Read one phrase per line; '#' comment lines and blanks are skipped."""
    phrases = []
    with open(path, encoding="utf-8-sig") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                phrases.append(line)
    return KeyPhraseSet(phrases)


def keyphrase_filter(
    records: Iterable[TweetRecord], phrases: KeyPhraseSet | None = None
) -> Iterator[TweetRecord]:
    """Keep records whose text contains any key phrase."""
    if phrases is None:
        phrases = KeyPhraseSet()
    for record in records:
        if phrases.matches(record.text):
            yield record


def hashtag_filter(records: Iterable[TweetRecord], tag: str) -> Iterator[TweetRecord]:
    """Keep records whose raw text carries the given hashtag.

    The tag may be passed with or without its leading '#'. The test runs
    on raw text because normalization drops hashtags entirely.
    """
    needle = "#" + tag.lstrip("#")
    for record in records:
        if needle in record.text:
            yield record


def load_app_registry(path: str | Path) -> list[str]:
    """Read app identifiers, one per line; '#' comments and blanks skipped."""
    apps = []
    with open(path, encoding="utf-8-sig") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                apps.append(line.lower())
    return apps


def detect_app_tweet(record: TweetRecord, app_registry: Iterable[str] = DEFAULT_APP_REGISTRY) -> bool:
    """True when the posting client matches a registered auto-posting app."""
    source = record.source.lower()
    if not source:
        return False
    return any(app.lower() in source for app in app_registry)


def fold_retweets(records: Iterable[TweetRecord]) -> tuple[list[TweetRecord], int]:
    """Fold explicit retweet records into their parents.

    A record with retweet_of pointing at a present parent is dropped and
    counted toward that parent: each parent's effective retweet_count is
    the larger of its captured counter and the number of explicit
    retweets observed. A retweet of an absent parent is kept as a
    standalone post and logged.

    Returns the kept records (input order) and the folded record count.
    """
    materialized = list(records)
    present = {r.id for r in materialized}
    explicit: dict[str, int] = {}
    for record in materialized:
        if record.retweet_of and record.retweet_of in present:
            explicit[record.retweet_of] = explicit.get(record.retweet_of, 0) + 1
    kept: list[TweetRecord] = []
    folded = 0
    for record in materialized:
        if record.retweet_of:
            if record.retweet_of in present:
                folded += 1
                continue
            logger.warning(
                "retweet %s references absent parent %s; keeping as standalone",
                record.id,
                record.retweet_of,
            )
        observed = explicit.get(record.id, 0)
        if observed > record.retweet_count:
            record = replace(record, retweet_count=observed)
        kept.append(record)
    return kept, folded


@dataclass(frozen=True)
class SideStats:
    """Aggregate sizes for one side of the partition.

    tweet_volume counts each tweet once plus once per retweet;
    verse_volume weights each matched verse occurrence the same way.
    """

    accounts: int = 0
    tweets: int = 0
    verses: int = 0
    tweet_volume: int = 0
    verse_volume: int = 0

    @property
    def verses_per_tweet(self) -> float:
        return self.verses / self.tweets if self.tweets else 0.0

    @property
    def retweets_per_tweet(self) -> float:
        return (self.tweet_volume - self.tweets) / self.tweets if self.tweets else 0.0


@dataclass
class DatasetPartition:
    """Validated tweets split into human and app sides."""

    human: list[TweetRecord]
    app: list[TweetRecord]
    human_stats: SideStats
    app_stats: SideStats

    @property
    def validated_count(self) -> int:
        return len(self.human) + len(self.app)


def _side_stats(pairs: list[tuple[TweetRecord, int]]) -> SideStats:
    accounts = {r.author_id for r, _ in pairs}
    tweets = len(pairs)
    verses = sum(n for _, n in pairs)
    tweet_volume = sum(r.volume for r, _ in pairs)
    verse_volume = sum(n * r.volume for r, n in pairs)
    return SideStats(len(accounts), tweets, verses, tweet_volume, verse_volume)


def partition_with_counts(
    pairs: Iterable[tuple[TweetRecord, int]],
    app_registry: Iterable[str] = DEFAULT_APP_REGISTRY,
) -> DatasetPartition:
    """Partition (record, match count) pairs into human and app sides.

    Records with zero matches are discarded. Every validated record lands
    on exactly one side.
    """
    registry = [a.lower() for a in app_registry]
    human: list[tuple[TweetRecord, int]] = []
    app: list[tuple[TweetRecord, int]] = []
    for record, n_matches in pairs:
        if n_matches <= 0:
            continue
        if detect_app_tweet(record, registry):
            app.append((record, n_matches))
        else:
            human.append((record, n_matches))
    return DatasetPartition(
        human=[r for r, _ in human],
        app=[r for r, _ in app],
        human_stats=_side_stats(human),
        app_stats=_side_stats(app),
    )


def partition(
    records: Iterable[TweetRecord],
    index: MatchIndex,
    app_registry: Iterable[str] = DEFAULT_APP_REGISTRY,
    min_tokens: int = 3,
) -> DatasetPartition:
    """Fold retweets, match every record, and split the validated ones."""
    kept, _ = fold_retweets(records)
    pairs = ((r, len(extract_verses(index, r.text, min_tokens).matches)) for r in kept)
    return partition_with_counts(pairs, app_registry)
