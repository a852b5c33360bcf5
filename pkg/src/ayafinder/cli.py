"""Command line pipeline.

Five subcommands cover the full workflow: build-index compiles a verse
corpus plus topic mapping into a reusable artifact, filter narrows a raw
record capture to candidate tweets, extract finds verse matches, analyze
produces the report bundle, and sample draws tweets for manual review.

Exit codes: 0 on success, 1 when a step succeeded but produced an empty
result, 2 on input errors. All outputs are deterministic functions of
the inputs and flags; nothing embeds timestamps or absolute paths.
"""

from __future__ import annotations

import functools
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import analytics
from .corpus import (
    CORPUS_FORMATS,
    Category,
    VerseRef,
    category_counts,
    load_categories,
    load_corpus,
    load_corpus_artifact,
    save_corpus_artifact,
)
from .errors import AyafinderError, SchemaViolation
from .ingest import (
    DEFAULT_APP_REGISTRY,
    KeyPhraseSet,
    fold_retweets,
    load_app_registry,
    load_key_phrases,
    parse_record,
    partition_with_counts,
    read_records,
)
from .matching import MatchKind, build_index, extract_verses

MATCH_HEADER = ("tweet_id", "sentence", "sura", "ayah", "kind", "categories", "weight")

# Sentences below this many tokens are never matched; lowering the floor
# to 2 lets extremely common two-word phrases match and needs an explicit
# opt-in flag.
DEFAULT_MIN_TOKENS = 3


@dataclass(frozen=True)
class MatchRow:
    """One line of a match file."""

    tweet_id: str
    sentence_index: int
    verse: VerseRef
    kind: MatchKind
    categories: tuple[Category, ...]
    weight: float


def _sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def _write_tsv(path: Path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(cell) for cell in row) + "\n")


def _read_match_file(path: str | Path) -> list[MatchRow]:
    rows: list[MatchRow] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if line_no == 1:
                if tuple(parts) != MATCH_HEADER:
                    raise SchemaViolation(line_no, "header", f"expected {MATCH_HEADER}")
                continue
            if len(parts) != len(MATCH_HEADER):
                raise SchemaViolation(line_no, "row", "wrong column count")
            tweet_id, sentence, sura, ayah, kind, cats, weight = parts
            try:
                row = MatchRow(
                    tweet_id=tweet_id,
                    sentence_index=int(sentence),
                    verse=VerseRef(int(sura), int(ayah)),
                    kind=MatchKind(kind),
                    categories=tuple(Category(c) for c in cats.split(";")) if cats else (),
                    weight=float(weight),
                )
            except ValueError as exc:
                raise SchemaViolation(line_no, "row", str(exc)) from exc
            rows.append(row)
    return rows


def pipeline_command(fn):
    """Map pipeline failures to exit code 2 and returns to exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except (AyafinderError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        sys.exit(code or 0)

    return wrapper


@click.group()
def main():
    """Find Quran verses in Arabic social media posts and analyze sharing."""


@main.command("build-index")
@click.option("--corpus", "corpus_path", required=True, help="Verse file, one verse per line.")
@click.option("--categories", "categories_path", default=None, help="Topic mapping CSV.")
@click.option(
    "--format",
    "corpus_format",
    default="pipe",
    type=click.Choice(sorted(CORPUS_FORMATS)),
    show_default=True,
    help="Corpus line format.",
)
@click.option("--allow-incomplete", is_flag=True, help="Accept fixture-sized corpora with a warning.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
@pipeline_command
def cmd_build_index(corpus_path, categories_path, corpus_format, allow_incomplete, out_dir):
    """Compile the verse corpus and topic mapping into an index artifact."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(corpus_path, corpus_format, allow_incomplete=allow_incomplete)
    if categories_path:
        corpus = load_categories(categories_path, corpus)
    digest = save_corpus_artifact(corpus, out / "corpus_index.json")
    counts = category_counts(corpus)
    _write_json(
        out / "build_summary.json",
        {
            "verses": corpus.verse_count,
            "suras": corpus.sura_count,
            "sha256": digest,
            "categories": {cat.value: {"verses": n, "share": pct} for cat, (n, pct) in counts.items()},
        },
    )
    click.echo(f"verses: {corpus.verse_count}")
    click.echo(f"suras: {corpus.sura_count}")
    click.echo(f"sha256: {digest}")
    click.echo("category\tverses\tshare%")
    for cat, (n, pct) in counts.items():
        click.echo(f"{cat.value}\t{n}\t{pct:.1f}")
    return 0


@main.command("filter")
@click.argument("records_path")
@click.option("--out", "out_dir", required=True, help="Output directory.")
@click.option("--phrases", "phrases_path", default=None, help="Key phrase file, one per line.")
@click.option("--hashtag", default=None, help="Keep only tweets carrying this hashtag.")
@click.option("--strict", is_flag=True, help="Abort on the first malformed record.")
@pipeline_command
def cmd_filter(records_path, out_dir, phrases_path, hashtag, strict):
    """Keep candidate tweets: key-phrase carriers or hashtag matches.

    With --hashtag and no --phrases, only the hashtag is tested. With
    both, a tweet must satisfy both. By default the built-in quotation
    phrases are used. Passing lines are copied through verbatim.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    phrases: KeyPhraseSet | None
    if phrases_path:
        phrases = load_key_phrases(phrases_path)
    elif hashtag:
        phrases = None
    else:
        phrases = KeyPhraseSet()
    needle = "#" + hashtag.lstrip("#") if hashtag else None

    records_read = 0
    records_skipped = 0
    records_passed = 0
    out_path = out / "filtered.jsonl"
    with open(records_path, encoding="utf-8") as src, open(
        out_path, "w", encoding="utf-8"
    ) as dst:
        for line_no, line in enumerate(src, start=1):
            if not line.strip():
                continue
            try:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaViolation(line_no, "record", f"invalid JSON: {exc.msg}") from exc
                record = parse_record(obj, line_no)
            except SchemaViolation as exc:
                if strict:
                    raise
                records_skipped += 1
                click.echo(f"warning: skipping {exc}", err=True)
                continue
            records_read += 1
            if needle is not None and needle not in record.text:
                continue
            if phrases is not None and not phrases.matches(record.text):
                continue
            records_passed += 1
            dst.write(line.rstrip("\n") + "\n")
    _write_json(
        out / "filter_summary.json",
        {
            "records_read": records_read,
            "records_skipped": records_skipped,
            "records_passed": records_passed,
            "phrase_count": len(phrases) if phrases is not None else 0,
            "hashtag": hashtag,
            "input_sha256": _sha256_file(records_path),
        },
    )
    click.echo(f"read: {records_read} skipped: {records_skipped} passed: {records_passed}")
    if records_passed == 0:
        click.echo("warning: no records passed the filter", err=True)
        return 1
    return 0


@main.command("extract")
@click.argument("records_path")
@click.option("--index", "index_path", required=True, help="Corpus index artifact.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
@click.option(
    "--min-tokens",
    default=DEFAULT_MIN_TOKENS,
    show_default=True,
    help="Shortest sentence, in tokens, eligible for matching.",
)
@click.option(
    "--unsafe-min-tokens",
    is_flag=True,
    help="Permit --min-tokens 2; two-token phrases are noisy to attribute.",
)
@click.option("--strict", is_flag=True, help="Abort on the first malformed record.")
@pipeline_command
def cmd_extract(records_path, index_path, out_dir, min_tokens, unsafe_min_tokens, strict):
    """Match records against the indexed verses, one output row per match."""
    if min_tokens < DEFAULT_MIN_TOKENS and not unsafe_min_tokens:
        raise click.UsageError(
            f"--min-tokens {min_tokens} is below {DEFAULT_MIN_TOKENS}; "
            "pass --unsafe-min-tokens to confirm"
        )
    if min_tokens < 2:
        raise click.UsageError("--min-tokens must be >= 2")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus_artifact(index_path)
    index = build_index(corpus)
    skipped = [0]

    def on_skip(line_no, exc):
        skipped[0] += 1

    records = list(read_records(records_path, strict=strict, on_skip=on_skip))
    kept, folded = fold_retweets(records)
    match_rows = 0
    validated = 0
    with open(out / "matches.tsv", "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(MATCH_HEADER) + "\n")
        for record in kept:
            found = extract_verses(index, record.text, min_tokens)
            if found.matches:
                validated += 1
            for m in found.matches:
                cats = ";".join(sorted(c.value for c in index.categories_of(m.verse)))
                fh.write(
                    "\t".join(
                        (
                            record.id,
                            str(m.sentence_index),
                            str(m.verse.sura),
                            str(m.verse.ayah),
                            m.kind.value,
                            cats,
                            str(record.volume),
                        )
                    )
                    + "\n"
                )
                match_rows += 1
    _write_json(
        out / "extract_summary.json",
        {
            "records_read": len(records) + skipped[0],
            "records_skipped": skipped[0],
            "records_folded": folded,
            "tweets_validated": validated,
            "match_rows": match_rows,
            "input_sha256": _sha256_file(records_path),
            "index_sha256": _sha256_file(index_path),
            "config": {"min_tokens": min_tokens, "strict": strict},
        },
    )
    click.echo(
        f"records: {len(records)} folded: {folded} validated: {validated} matches: {match_rows}"
    )
    if match_rows == 0:
        click.echo("warning: no verses matched", err=True)
        return 1
    return 0


def _percent_cell(dist, cat) -> str:
    if dist is None:
        return ""
    return f"{dist.percentage(cat):.6f}"


@main.command("analyze")
@click.option("--matches", "matches_path", required=True, help="Match file from extract.")
@click.option("--tweets", "tweets_path", required=True, help="Record file the matches came from.")
@click.option("--index", "index_path", required=True, help="Corpus index artifact.")
@click.option("--labels", "labels_path", default=None, help="Account label CSV.")
@click.option("--apps", "apps_path", default=None, help="App registry file.")
@click.option(
    "--weight-mode",
    type=click.Choice(["volume", "count"]),
    default="volume",
    show_default=True,
    help="volume weights a tweet by 1 + retweets; count weights every tweet 1.",
)
@click.option(
    "--distinct-verses",
    is_flag=True,
    help="Split each matched sentence's weight evenly across its matched verses.",
)
@click.option("--top-n", default=10, show_default=True, help="Leaderboard length.")
@click.option("--top-accounts", default=500, show_default=True, help="Influential account list length.")
@click.option("--strict", is_flag=True, help="Abort on the first malformed record.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
@pipeline_command
def cmd_analyze(
    matches_path,
    tweets_path,
    index_path,
    labels_path,
    apps_path,
    weight_mode,
    distinct_verses,
    top_n,
    top_accounts,
    strict,
    out_dir,
):
    """Produce the report bundle from a match file and its record file.

    Writes category_distribution.tsv (corpus baseline next to the human
    and app sides), top verse leaderboards for the human side, the human
    retweet histogram, partition statistics, an influential account list,
    a grouped distribution when labels are given, and summary.json.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus_artifact(index_path)
    registry = load_app_registry(apps_path) if apps_path else list(DEFAULT_APP_REGISTRY)
    labels = analytics.load_labels(labels_path) if labels_path else None

    rows = _read_match_file(matches_path)
    skipped = [0]

    def on_skip(line_no, exc):
        skipped[0] += 1

    records = list(read_records(tweets_path, strict=strict, on_skip=on_skip))
    kept, folded = fold_retweets(records)
    by_id = {r.id: r for r in kept}

    events: list[analytics.MatchEvent] = []
    row_counts: dict[str, int] = {}
    unjoined_rows = 0
    for row in rows:
        record = by_id.get(row.tweet_id)
        if record is None:
            unjoined_rows += 1
            continue
        row_counts[row.tweet_id] = row_counts.get(row.tweet_id, 0) + 1
        weight = row.weight if weight_mode == "volume" else 1.0
        events.append(
            analytics.MatchEvent(
                tweet_id=row.tweet_id,
                author_id=record.author_id,
                verse=row.verse,
                kind=row.kind,
                sentence_index=row.sentence_index,
                categories=frozenset(row.categories),
                weight=weight,
            )
        )
    if unjoined_rows:
        click.echo(f"warning: {unjoined_rows} match rows had no record and were dropped", err=True)

    part = partition_with_counts(
        ((r, row_counts.get(r.id, 0)) for r in kept), registry
    )
    app_ids = {r.id for r in part.app}
    human_events = [e for e in events if e.tweet_id not in app_ids]
    app_events = [e for e in events if e.tweet_id in app_ids]

    baseline = analytics.quran_baseline(corpus)
    human_dist = (
        analytics.category_distribution(human_events, distinct=distinct_verses)
        if human_events
        else None
    )
    app_dist = (
        analytics.category_distribution(app_events, distinct=distinct_verses)
        if app_events
        else None
    )
    counts = category_counts(corpus)
    _write_tsv(
        out / "category_distribution.tsv",
        ("category", "quran_verses", "quran_share", "human_share", "app_share"),
        (
            (
                cat.value,
                counts[cat][0],
                f"{baseline.percentage(cat):.6f}",
                _percent_cell(human_dist, cat),
                _percent_cell(app_dist, cat),
            )
            for cat in Category
        ),
    )

    for kind, name in ((MatchKind.FULL, "top_verses_full.tsv"), (MatchKind.FRAGMENT, "top_verses_fragment.tsv")):
        board = analytics.top_verses(human_events, kind, top_n) if human_events else None
        entries = board.entries if board else ()
        _write_tsv(
            out / name,
            ("rank", "sura", "ayah", "weight"),
            (
                (i + 1, e.verse.sura, e.verse.ayah, f"{e.weight:.6f}")
                for i, e in enumerate(entries)
            ),
        )

    histogram = analytics.retweet_histogram(part.human)
    _write_tsv(
        out / "retweet_histogram.tsv",
        ("retweets", "tweets"),
        ((k, c) for k, c in sorted(histogram.counts.items())),
    )
    try:
        slope, intercept = analytics.fit_power_law(histogram)
    except analytics.DegenerateInput:
        slope = intercept = None
    app_histogram = analytics.retweet_histogram(part.app)

    _write_tsv(
        out / "partition_stats.tsv",
        ("side", "accounts", "tweets", "verses", "tweet_volume", "verse_volume", "verses_per_tweet"),
        (
            (
                side,
                st.accounts,
                st.tweets,
                st.verses,
                st.tweet_volume,
                st.verse_volume,
                f"{st.verses_per_tweet:.6f}",
            )
            for side, st in (("human", part.human_stats), ("app", part.app_stats))
        ),
    )

    profiles = analytics.build_account_profiles(part.human, labels)
    influential = analytics.select_influential(profiles, top_accounts)
    _write_tsv(
        out / "top_accounts.tsv",
        ("rank", "author_id", "tweets", "retweets_received", "followers", "main_label", "secondary_label"),
        (
            (
                i + 1,
                p.author_id,
                p.tweet_count,
                p.retweets_received,
                p.followers,
                p.label[0] if p.label else "",
                p.label[1] if p.label else "",
            )
            for i, p in enumerate(influential)
        ),
    )
    try:
        correlation = analytics.follower_retweet_correlation(profiles)
    except analytics.DegenerateInput:
        correlation = None

    grouped_unjoined = None
    if labels is not None:
        group_of = {author: f"{main}-{sec}" for author, (main, sec) in labels.items()}
        grouped = analytics.grouped_distribution(human_events, group_of)
        grouped_unjoined = grouped.unjoined
        group_names = sorted(grouped.groups)
        _write_tsv(
            out / "grouped_distribution.tsv",
            ("category",) + tuple(f"{g}_share" for g in group_names),
            (
                (cat.value,)
                + tuple(f"{grouped.groups[g].percentage(cat):.6f}" for g in group_names)
                for cat in Category
            ),
        )

    summary = {
        "config": {
            "weight_mode": weight_mode,
            "distinct_verses": distinct_verses,
            "top_n": top_n,
            "top_accounts": top_accounts,
            "apps": "file" if apps_path else "default",
            "labels": labels_path is not None,
        },
        "inputs": {
            "matches_sha256": _sha256_file(matches_path),
            "tweets_sha256": _sha256_file(tweets_path),
            "index_sha256": _sha256_file(index_path),
        },
        "counts": {
            "match_rows": len(rows),
            "events": len(events),
            "unjoined_rows": unjoined_rows,
            "records_read": len(records) + skipped[0],
            "records_skipped": skipped[0],
            "records_folded": folded,
            "validated_human": len(part.human),
            "validated_app": len(part.app),
            "grouped_unjoined_events": grouped_unjoined,
        },
        "stats": {
            "human": {
                "accounts": part.human_stats.accounts,
                "tweets": part.human_stats.tweets,
                "verses": part.human_stats.verses,
                "tweet_volume": part.human_stats.tweet_volume,
                "verse_volume": part.human_stats.verse_volume,
            },
            "app": {
                "accounts": part.app_stats.accounts,
                "tweets": part.app_stats.tweets,
                "verses": part.app_stats.verses,
                "tweet_volume": part.app_stats.tweet_volume,
                "verse_volume": part.app_stats.verse_volume,
            },
            "fraction_retweeted_human": histogram.fraction_retweeted if part.human else None,
            "fraction_retweeted_app": app_histogram.fraction_retweeted if part.app else None,
            "power_law_slope": slope,
            "power_law_intercept": intercept,
            "follower_retweet_correlation": correlation,
        },
    }
    _write_json(out / "summary.json", summary)
    click.echo(
        f"events: {len(events)} human: {len(part.human)} app: {len(part.app)} "
        f"unjoined: {unjoined_rows}"
    )
    if not events:
        click.echo("warning: no match events to analyze", err=True)
        return 1
    return 0


@main.command("sample")
@click.option("--matches", "matches_path", required=True, help="Match file from extract.")
@click.option("--tweets", "tweets_path", required=True, help="Record file the matches came from.")
@click.option("--n-full", default=100, show_default=True, help="Tweets with full matches to draw.")
@click.option("--n-fragment", default=100, show_default=True, help="Tweets with fragment matches to draw.")
@click.option("--seed", default=0, show_default=True, help="Sampling seed.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
@pipeline_command
def cmd_sample(matches_path, tweets_path, n_full, n_fragment, seed, out_dir):
    """Draw a reproducible review sample of matched tweets."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = _read_match_file(matches_path)
    events = [
        analytics.MatchEvent(
            tweet_id=r.tweet_id,
            author_id="",
            verse=r.verse,
            kind=r.kind,
            sentence_index=r.sentence_index,
            categories=frozenset(r.categories),
            weight=r.weight,
        )
        for r in rows
    ]
    sample = analytics.sample_for_review(events, n_full, n_fragment, seed)
    texts = {}
    for record in read_records(tweets_path):
        texts[record.id] = record.text
    out_rows = []
    for pool, ids in (("full", sample.full_ids), ("fragment", sample.fragment_ids)):
        for tid in ids:
            out_rows.append((pool, tid, texts.get(tid, "").replace("\t", " ").replace("\n", " ")))
    _write_tsv(out / "review_sample.tsv", ("pool", "tweet_id", "text"), out_rows)
    _write_json(
        out / "sample_summary.json",
        {
            "requested_full": n_full,
            "requested_fragment": n_fragment,
            "drawn_full": len(sample.full_ids),
            "drawn_fragment": len(sample.fragment_ids),
            "truncated": sample.truncated,
            "seed": seed,
            "matches_sha256": _sha256_file(matches_path),
        },
    )
    click.echo(
        f"full: {len(sample.full_ids)}/{n_full} fragment: {len(sample.fragment_ids)}/{n_fragment}"
    )
    if sample.truncated:
        click.echo("warning: a pool was smaller than requested; returned all of it", err=True)
    if not sample.full_ids and not sample.fragment_ids:
        click.echo("warning: no matched tweets to sample", err=True)
        return 1
    return 0


if __name__ == "__main__":
    main()
