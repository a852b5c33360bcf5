"""Aggregate analytics over matched verse occurrences.

The unit of analysis is a match event: one verse matched by one sentence
of one tweet, carrying the verse's topic labels and the tweet's volume
weight (the post plus its retweets). Distributions report, per topic,
the share of total verse volume carried by verses of that topic; labels
are a multiset, so shares can sum past 100 percent.
"""

from __future__ import annotations

import logging
import math
import random
import statistics
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Category, QuranCorpus, VerseRef
from .errors import DegenerateInput, EmptyDataset, SchemaViolation, UnknownGroupKey
from .ingest import TweetRecord
from .matching import MatchKind, MatchList

logger = logging.getLogger(__name__)

__all__ = [
    "MatchEvent",
    "CategoryDistribution",
    "LeaderboardEntry",
    "VerseLeaderboard",
    "RetweetHistogram",
    "AccountProfile",
    "GroupedDistribution",
    "ReviewSample",
    "events_from_matches",
    "category_distribution",
    "quran_baseline",
    "top_verses",
    "retweet_histogram",
    "fit_power_law",
    "build_account_profiles",
    "select_influential",
    "pearson",
    "follower_retweet_correlation",
    "load_labels",
    "grouped_distribution",
    "sample_for_review",
]

MAIN_LABELS = ("Personal", "Page")
SECONDARY_LABELS = ("RCE", "General")


@dataclass(frozen=True)
class MatchEvent:
    """One verse occurrence inside one tweet."""

    tweet_id: str
    author_id: str
    verse: VerseRef
    kind: MatchKind
    sentence_index: int
    categories: frozenset[Category]
    weight: float


def events_from_matches(
    record: TweetRecord, match_list: MatchList, categories_of, weight: float | None = None
) -> list[MatchEvent]:
    """Expand one tweet's MatchList into events.

    categories_of maps a VerseRef to its label set (an index method fits
    directly). Weight defaults to the record's volume.
    """
    w = float(record.volume if weight is None else weight)
    return [
        MatchEvent(
            tweet_id=record.id,
            author_id=record.author_id,
            verse=m.verse,
            kind=m.kind,
            sentence_index=m.sentence_index,
            categories=frozenset(categories_of(m.verse)),
            weight=w,
        )
        for m in match_list.matches
    ]


@dataclass
class CategoryDistribution:
    """Per-topic share of verse volume, on a 0..100 scale."""

    volumes: dict[Category, float]
    total: float

    def percentage(self, cat: Category) -> float:
        return 100.0 * self.volumes.get(cat, 0.0) / self.total

    def percentages(self) -> dict[Category, float]:
        """Shares for every topic in declaration order."""
        return {cat: self.percentage(cat) for cat in Category}


def category_distribution(
    events: Iterable[MatchEvent], distinct: bool = False
) -> CategoryDistribution:
    """Topic distribution over match events.

    Each event adds its weight to every topic its verse carries, and once
    to the total, so a multi-topic verse inflates topic shares but not
    the denominator. With distinct=True an event's weight is first split
    evenly among the events sharing its (tweet, sentence) slot, which
    makes each matched sentence contribute one unit of weight total.

    Raises EmptyDataset when no events carry positive weight.
    """
    events = list(events)
    share: dict[tuple[str, int], int] = {}
    if distinct:
        share = Counter((e.tweet_id, e.sentence_index) for e in events)
    volumes: dict[Category, float] = {cat: 0.0 for cat in Category}
    total = 0.0
    for event in events:
        w = event.weight
        if distinct:
            w = w / share[(event.tweet_id, event.sentence_index)]
        total += w
        for cat in event.categories:
            volumes[cat] += w
    if total <= 0:
        raise EmptyDataset("no match events to aggregate")
    return CategoryDistribution(volumes, total)


def quran_baseline(corpus: QuranCorpus) -> CategoryDistribution:
    """Topic distribution of the corpus itself, every verse weighted once."""
    volumes: dict[Category, float] = {cat: 0.0 for cat in Category}
    for verse in corpus:
        for cat in verse.categories:
            volumes[cat] += 1.0
    if corpus.verse_count == 0:
        raise EmptyDataset("empty corpus")
    return CategoryDistribution(volumes, float(corpus.verse_count))


@dataclass(frozen=True)
class LeaderboardEntry:
    verse: VerseRef
    kind: MatchKind
    weight: float


@dataclass(frozen=True)
class VerseLeaderboard:
    entries: tuple[LeaderboardEntry, ...]


def top_verses(
    events: Iterable[MatchEvent], kind: MatchKind | None = None, n: int = 10
) -> VerseLeaderboard:
    """Most shared verses by accumulated weight.

    Restricts to one match kind when given. Ties break toward the earlier
    corpus position (sura, then ayah), so ranking is total.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    weights: dict[tuple[VerseRef, MatchKind], float] = {}
    for event in events:
        if kind is not None and event.kind != kind:
            continue
        key = (event.verse, event.kind)
        weights[key] = weights.get(key, 0.0) + event.weight
    ranked = sorted(
        weights.items(),
        key=lambda kv: (-kv[1], kv[0][0].sura, kv[0][0].ayah, kv[0][1].value),
    )
    return VerseLeaderboard(
        tuple(LeaderboardEntry(ref, k, w) for (ref, k), w in ranked[:n])
    )


@dataclass(frozen=True)
class RetweetHistogram:
    """Distribution of per-tweet retweet counters."""

    counts: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def fraction_retweeted(self) -> float:
        total = self.total
        if total == 0:
            return 0.0
        return 1.0 - self.counts.get(0, 0) / total

    def loglog_points(self) -> list[tuple[float, float]]:
        """(log10 k, log10 tweets with k retweets) for k >= 1, ascending k."""
        return [
            (math.log10(k), math.log10(c))
            for k, c in sorted(self.counts.items())
            if k > 0 and c > 0
        ]


def retweet_histogram(records: Iterable[TweetRecord]) -> RetweetHistogram:
    """Histogram of retweet counters over a record set."""
    counts = Counter(r.retweet_count for r in records)
    return RetweetHistogram(dict(counts))


def fit_power_law(histogram: RetweetHistogram) -> tuple[float, float]:
    """Least-squares line through the log-log histogram.

    Returns (slope, intercept) in log10 space; a power-law tail with
    exponent s shows up as slope close to -s. Raises DegenerateInput
    with fewer than two nonzero bins.
    """
    points = histogram.loglog_points()
    if len(points) < 2:
        raise DegenerateInput(f"need >= 2 nonzero histogram bins, have {len(points)}")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    try:
        fit = statistics.linear_regression(xs, ys)
    except statistics.StatisticsError as exc:
        raise DegenerateInput(str(exc)) from exc
    return fit.slope, fit.intercept


@dataclass(frozen=True)
class AccountProfile:
    """Per-author aggregate over their validated tweets."""

    author_id: str
    tweet_count: int
    retweets_received: int
    followers: int
    label: tuple[str, str] | None = None

    @property
    def group(self) -> str | None:
        return f"{self.label[0]}-{self.label[1]}" if self.label else None


def build_account_profiles(
    records: Iterable[TweetRecord],
    labels: Mapping[str, tuple[str, str]] | None = None,
) -> list[AccountProfile]:
    """Aggregate records per author, sorted by author_id.

    followers is taken from the author's last record in input order
    (profiles drift between captures; last write wins).
    """
    tweet_count: dict[str, int] = {}
    retweets: dict[str, int] = {}
    followers: dict[str, int] = {}
    for record in records:
        a = record.author_id
        tweet_count[a] = tweet_count.get(a, 0) + 1
        retweets[a] = retweets.get(a, 0) + record.retweet_count
        followers[a] = record.followers
    labels = labels or {}
    return [
        AccountProfile(a, tweet_count[a], retweets[a], followers[a], labels.get(a))
        for a in sorted(tweet_count)
    ]


def select_influential(profiles: Sequence[AccountProfile], k: int) -> list[AccountProfile]:
    """Top k accounts by retweets received; ties break on author_id."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    ranked = sorted(profiles, key=lambda p: (-p.retweets_received, p.author_id))
    return list(ranked[:k])


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation coefficient.

    Integer inputs run through exact integer moments, so perfectly linear
    integer data returns exactly 1.0 or -1.0. Raises DegenerateInput for
    fewer than two points or a zero-variance axis.
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise DegenerateInput(f"need >= 2 points, have {n}")
    if all(isinstance(v, int) for v in xs) and all(isinstance(v, int) for v in ys):
        sx, sy = sum(xs), sum(ys)
        sxx = sum(x * x for x in xs)
        syy = sum(y * y for y in ys)
        sxy = sum(x * y for x, y in zip(xs, ys))
        dx = n * sxx - sx * sx
        dy = n * syy - sy * sy
        num = n * sxy - sx * sy
        if dx == 0 or dy == 0:
            raise DegenerateInput("zero variance axis")
        if num * num == dx * dy:
            return 1.0 if num > 0 else -1.0
        return num / math.sqrt(dx) / math.sqrt(dy)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dxx = math.fsum((x - mx) ** 2 for x in xs)
    dyy = math.fsum((y - my) ** 2 for y in ys)
    dxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if dxx == 0.0 or dyy == 0.0:
        raise DegenerateInput("zero variance axis")
    r = dxy / math.sqrt(dxx * dyy)
    return max(-1.0, min(1.0, r))


def follower_retweet_correlation(profiles: Sequence[AccountProfile]) -> float:
    """Correlation between follower counts and retweets received."""
    xs = [p.followers for p in profiles]
    ys = [p.retweets_received for p in profiles]
    return pearson(xs, ys)


def load_labels(path: str | Path) -> dict[str, tuple[str, str]]:
    """Read account labels from CSV rows ``author_id,main,secondary``.

    main must be Personal or Page; secondary must be RCE or General
    (case-insensitive). A header row is detected by its first cell being
    literally 'author_id'.
    """
    import csv

    def canon(value: str, allowed: tuple[str, ...], line_no: int, field: str) -> str:
        for candidate in allowed:
            if value.strip().lower() == candidate.lower():
                return candidate
        raise SchemaViolation(line_no, field, f"expected one of {allowed}, got {value!r}")

    out: dict[str, tuple[str, str]] = {}
    with open(path, encoding="utf-8-sig", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not any(cell.strip() for cell in row):
                continue
            if row[0].strip().lower() == "author_id":
                continue
            if len(row) < 3:
                raise SchemaViolation(line_no, "row", "expected author_id,main,secondary")
            author = row[0].strip()
            if not author:
                raise SchemaViolation(line_no, "author_id", "empty")
            main = canon(row[1], MAIN_LABELS, line_no, "main_label")
            secondary = canon(row[2], SECONDARY_LABELS, line_no, "secondary_label")
            out[author] = (main, secondary)
    return out


@dataclass
class GroupedDistribution:
    """Per-group topic distributions plus the count of unjoinable events."""

    groups: dict[str, CategoryDistribution]
    unjoined: int


def grouped_distribution(
    events: Iterable[MatchEvent],
    group_of: Mapping[str, str],
    key_field: str = "author_id",
) -> GroupedDistribution:
    """Split events by a group mapping and aggregate each side.

    key_field selects which event field joins against group_of; only
    author_id and tweet_id are supported (UnknownGroupKey otherwise).
    Events whose key has no group are counted, not dropped silently.
    """
    if key_field not in ("author_id", "tweet_id"):
        raise UnknownGroupKey(key_field)
    buckets: dict[str, list[MatchEvent]] = {}
    unjoined = 0
    for event in events:
        key = getattr(event, key_field)
        group = group_of.get(key)
        if group is None:
            unjoined += 1
            continue
        buckets.setdefault(group, []).append(event)
    groups = {
        name: category_distribution(bucket)
        for name, bucket in sorted(buckets.items())
    }
    if unjoined:
        logger.warning("grouped distribution: %d events had no group", unjoined)
    return GroupedDistribution(groups, unjoined)


@dataclass(frozen=True)
class ReviewSample:
    """Tweet ids drawn for manual precision review."""

    full_ids: tuple[str, ...]
    fragment_ids: tuple[str, ...]
    truncated: bool


def sample_for_review(
    events: Iterable[MatchEvent], n_full: int, n_fragment: int, seed: int
) -> ReviewSample:
    """Draw tweets containing full and fragment matches, reproducibly.

    Pools are the distinct tweet ids per match kind. When a pool is
    smaller than requested, the whole pool is returned and the result is
    flagged truncated.
    """
    if n_full < 0 or n_fragment < 0:
        raise ValueError("sample sizes must be >= 0")
    full_pool: set[str] = set()
    fragment_pool: set[str] = set()
    for event in events:
        if event.kind == MatchKind.FULL:
            full_pool.add(event.tweet_id)
        else:
            fragment_pool.add(event.tweet_id)
    rng = random.Random(seed)

    def draw(pool: set[str], n: int) -> tuple[list[str], bool]:
        ordered = sorted(pool)
        if len(ordered) <= n:
            return ordered, len(ordered) < n
        return rng.sample(ordered, n), False

    full_ids, full_short = draw(full_pool, n_full)
    fragment_ids, fragment_short = draw(fragment_pool, n_fragment)
    return ReviewSample(tuple(full_ids), tuple(fragment_ids), full_short or fragment_short)
