"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ACCEPTANCE line (visible with -s, and in the
captured output on failure) in addition to its pytest verdict.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

import pytest
from click.testing import CliRunner

from ayafinder import (
    Category,
    MatchEvent,
    MatchKind,
    RetweetHistogram,
    build_index,
    category_counts,
    category_distribution,
    extract_verses,
    fit_power_law,
    load_categories,
    load_corpus,
    match_sentence,
    parse_record,
    partition,
    pearson,
    quran_baseline,
)
from ayafinder.cli import main as cli_main
from ayafinder.corpus import VerseRef

from brute_force import brute_force_matches
from conftest import (
    REAL_VERSES,
    TOPIC_TABLE,
    ZipfSampler,
    make_record,
    synth_vocab,
    topic_table_rows,
    write_lines,
    write_records,
)


def report(number: int, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number:2d} {verdict}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def full_index(full_corpus):
    return build_index(full_corpus)


class TestAcceptance:
    def test_criterion_01_corpus_integrity(self, full_corpus_path):
        started = time.perf_counter()
        corpus = load_corpus(full_corpus_path)
        elapsed = time.perf_counter() - started
        ok = (
            corpus.sura_count == 114
            and corpus.verse_count == 6236
            and elapsed < 5.0
        )
        report(
            1, ok,
            f"complete corpus loads as {corpus.sura_count} suras / "
            f"{corpus.verse_count} verses in {elapsed:.2f}s (limit 5s)",
        )

    def test_criterion_02_baseline_distribution(self, full_corpus, tmp_path):
        refs = [v.ref for v in full_corpus]
        table = write_lines(tmp_path / "topics.csv", topic_table_rows(refs))
        labeled = load_categories(table, full_corpus)

        counts = category_counts(labeled)
        baseline = quran_baseline(labeled)
        worst = 0.0
        for cat, (want_count, want_pct) in TOPIC_TABLE.items():
            assert counts[cat][0] == want_count, cat
            worst = max(worst, abs(baseline.percentage(cat) - want_pct))
        report(
            2, worst <= 0.05,
            f"all 14 baseline percentages within {worst:.4f} pp of the "
            "published table (tolerance 0.05 pp)",
        )

    def test_criterion_03_oracle_equivalence(self, tmp_path):
        rng = random.Random(777)
        vocab = synth_vocab(rng, 400)
        lines = []
        for sura in range(1, 101):
            length = rng.randint(4, 18)
            lines.append(f"{sura}|1|{' '.join(rng.choices(vocab, k=length))}")
        corpus = load_corpus(
            write_lines(tmp_path / "hundred.txt", lines), allow_incomplete=True
        )
        index = build_index(corpus)
        verse_tokens = {v.ref: v.norm_tokens for v in corpus}
        verses = list(corpus)

        probe_rng = random.Random(778)
        started = time.perf_counter()
        disagreements = 0
        for _ in range(5000):
            style = probe_rng.randrange(4)
            if style == 0:  # contiguous verse extract, 1..15 tokens
                v = probe_rng.choice(verses)
                n = probe_rng.randint(1, min(15, len(v.norm_tokens)))
                start = probe_rng.randint(0, len(v.norm_tokens) - n)
                probe = list(v.norm_tokens[start : start + n])
            elif style == 1:  # shuffled extract
                v = probe_rng.choice(verses)
                n = probe_rng.randint(2, min(15, len(v.norm_tokens)))
                start = probe_rng.randint(0, len(v.norm_tokens) - n)
                probe = list(v.norm_tokens[start : start + n])
                probe_rng.shuffle(probe)
            elif style == 2:  # cross-verse concatenation
                a, b = probe_rng.choice(verses), probe_rng.choice(verses)
                na = probe_rng.randint(1, min(7, len(a.norm_tokens)))
                nb = probe_rng.randint(1, min(7, len(b.norm_tokens)))
                probe = list(a.norm_tokens[:na]) + list(b.norm_tokens[-nb:])
            else:  # vocabulary noise
                probe = probe_rng.choices(vocab, k=probe_rng.randint(1, 15))
            got = sorted(
                (m.verse, m.kind.value, m.span[0])
                for m in match_sentence(index, probe)
            )
            want = brute_force_matches(verse_tokens, probe)
            if got != want:
                disagreements += 1
        elapsed = time.perf_counter() - started
        ok = disagreements == 0 and elapsed < 30.0
        report(
            3, ok,
            f"5000 randomized probes vs reference scanner: "
            f"{disagreements} disagreements in {elapsed:.2f}s (limit 30s)",
        )

    def test_criterion_04_minimum_length(self, real_index, full_corpus, full_index):
        # every adjacent 2-token window of every real verse must miss
        two_token_hits = 0
        probes = 0
        for ref in [VerseRef(s, a) for s, a in sorted(REAL_VERSES)]:
            tokens = real_index.tokens_of(ref)
            for start in range(len(tokens) - 1):
                probes += 1
                two_token_hits += len(match_sentence(real_index, tokens[start : start + 2]))
        # the real 2-word verse is itself too short to count
        short_verse = real_index.tokens_of(VerseRef(112, 2))
        assert len(short_verse) == 2
        two_token_hits += len(match_sentence(real_index, short_verse))
        probes += 1

        # sampled 2-token windows over the synthetic corpus
        rng = random.Random(4241)
        synth_verses = list(full_corpus)
        for _ in range(500):
            v = rng.choice(synth_verses)
            start = rng.randint(0, len(v.norm_tokens) - 2)
            probes += 1
            two_token_hits += len(
                match_sentence(full_index, v.norm_tokens[start : start + 2])
            )

        # 1000 planted contiguous extracts of >= 3 tokens must all be found
        plant_rng = random.Random(4242)
        vocab = synth_vocab(plant_rng, 500)
        found = 0
        for _ in range(1000):
            v = plant_rng.choice(synth_verses)
            n = plant_rng.randint(3, min(12, len(v.norm_tokens)))
            start = plant_rng.randint(0, len(v.norm_tokens) - n)
            extract = " ".join(v.norm_tokens[start : start + n])
            noise = lambda: " ".join(plant_rng.choices(vocab, k=plant_rng.randint(2, 9)))
            text = f"{noise()}. {extract}. {noise()}"
            matches = extract_verses(full_index, text).matches
            if any(m.verse == v.ref for m in matches):
                found += 1
        ok = two_token_hits == 0 and found == 1000
        report(
            4, ok,
            f"{probes} two-token probes -> {two_token_hits} matches (want 0); "
            f"planted extracts found {found}/1000 (want 1000)",
        )

    def test_criterion_05_weighted_distribution_fixture(self):
        god = frozenset({Category.GOD})
        jihad_worship = frozenset({Category.JIHAD, Category.WORSHIP})
        general = frozenset({Category.GENERAL})
        hereafter = frozenset({Category.HEREAFTER_UNSEENS})
        sins_god = frozenset({Category.SINS, Category.GOD})

        def event(i: int, ref: VerseRef, cats: frozenset, weight: float) -> MatchEvent:
            return MatchEvent(
                tweet_id=f"t{i}", author_id=f"a{i}", verse=ref,
                kind=MatchKind.FRAGMENT, sentence_index=0,
                categories=cats, weight=weight,
            )

        X, Y, Z, W, V = (VerseRef(2, k) for k in range(1, 6))
        spec_rows = [  # (verse, categories, weight)
            (X, god, 1), (Y, jihad_worship, 3), (X, god, 2), (Z, general, 5),
            (Y, jihad_worship, 1), (W, hereafter, 4), (Z, general, 2),
            (W, hereafter, 1), (V, sins_god, 6), (X, god, 2),
        ]
        events = [event(i, r, c, float(w)) for i, (r, c, w) in enumerate(spec_rows)]
        dist = category_distribution(events)

        # hand-derived: total 27; God 11, Jihad 4, Worship 4, General 7,
        # HereafterUnseens 5, Sins 6; every other topic 0.
        hand_volumes = {
            Category.GOD: 11, Category.JIHAD: 4, Category.WORSHIP: 4,
            Category.GENERAL: 7, Category.HEREAFTER_UNSEENS: 5, Category.SINS: 6,
        }
        assert dist.total == 27.0
        exact = True
        for cat in Category:
            want_volume = hand_volumes.get(cat, 0)
            want_pct = float(Fraction(100 * want_volume, 27))
            if dist.volumes.get(cat, 0.0) != float(want_volume):
                exact = False
            if dist.percentage(cat) != want_pct:
                exact = False

        scaled = [
            event(i, r, c, float(w * 7)) for i, (r, c, w) in enumerate(spec_rows)
        ]
        scaled_dist = category_distribution(scaled)
        invariant = all(
            scaled_dist.percentage(cat) == dist.percentage(cat) for cat in Category
        )
        report(
            5, exact and invariant,
            "10-tweet fixture matches hand-derived shares exactly; "
            f"x7 weights bit-identical: {invariant}",
        )

    def test_criterion_06_partition_arithmetic(self, real_index):
        v112_1 = REAL_VERSES[(112, 1)]
        v113_1 = REAL_VERSES[(113, 1)]
        v68_4 = REAL_VERSES[(68, 4)]
        v1_1 = REAL_VERSES[(1, 1)]
        rows = [
            make_record(1, f"{v112_1}. {v113_1}", author_id="a1", retweet_count=2),
            make_record(2, v1_1, author_id="a1", retweet_count=0),
            make_record(3, "وما كان ربك نسيا", author_id="a2", retweet_count=4),
            make_record(4, "كلام بلا اقتباس هنا", author_id="a3", retweet_count=1),
            make_record(5, v112_1, author_id="a4", retweet_count=3, source="du3a.org"),
            make_record(6, f"{v113_1}. {v68_4}", author_id="a5", retweet_count=0,
                        source="Zad-Muslim.com"),
            make_record(7, "لا شيء هنا ايضا", author_id="a6", retweet_count=7,
                        source="du3a.org"),
        ]
        records = [parse_record(r, i) for i, r in enumerate(rows, 1)]
        split = partition(records, real_index)

        h, a = split.human_stats, split.app_stats
        # hand computation: human side holds t1 (2 verses, volume 3),
        # t2 (1 verse, volume 1), t3 (1 verse, volume 5); app side holds
        # t5 (1 verse, volume 4) and t6 (2 verses, volume 1).
        human_ok = (
            h.accounts == 2 and h.tweets == 3 and h.verses == 4
            and h.tweet_volume == 9 and h.verse_volume == 12
            and h.verses_per_tweet == 4 / 3 and h.retweets_per_tweet == 2.0
        )
        app_ok = (
            a.accounts == 2 and a.tweets == 2 and a.verses == 3
            and a.tweet_volume == 5 and a.verse_volume == 6
            and a.verses_per_tweet == 1.5 and a.retweets_per_tweet == 1.5
        )
        human_ids = {r.id for r in split.human}
        app_ids = {r.id for r in split.app}
        sets_ok = (
            human_ids == {"t0000001", "t0000002", "t0000003"}
            and app_ids == {"t0000005", "t0000006"}
            and not (human_ids & app_ids)
            and split.validated_count == 5
        )
        report(
            6, human_ok and app_ok and sets_ok,
            "side statistics equal hand computation; sides disjoint and "
            "exhaustive over validated tweets",
        )

    def test_criterion_07_zipf_property(self):
        exponent, p_zero = 2.0, 0.78
        sampler = ZipfSampler(exponent, p_zero, k_max=50)
        rng = random.Random(123456)
        from collections import Counter

        counts = Counter(sampler.draw(rng) for _ in range(100_000))
        hist = RetweetHistogram(dict(counts))
        slope, _ = fit_power_law(hist)
        fraction = hist.fraction_retweeted
        slope_err = abs(slope - (-exponent))
        frac_err = abs(fraction - (1.0 - p_zero))
        ok = slope_err <= 0.2 and frac_err <= 0.01
        report(
            7, ok,
            f"100k draws: slope {slope:+.3f} vs -2.0 (err {slope_err:.3f}, "
            f"limit 0.2); retweeted {fraction:.4f} vs 0.22 "
            f"(err {frac_err:.4f}, limit 0.01)",
        )

    def test_criterion_08_correlation(self):
        xs = list(range(1, 21))
        up = pearson(xs, [3 * x + 2 for x in xs])
        down = pearson(xs, [-5 * x + 100 for x in xs])
        exact_ok = up == 1.0 and down == -1.0

        import math

        worst = 0.0
        for seed in (1, 2, 3, 4, 5):
            rng = random.Random(seed)
            n = rng.randint(10, 400)
            x = [rng.uniform(-1e3, 1e3) for _ in range(n)]
            y = [rng.uniform(-1e3, 1e3) for _ in range(n)]
            mx = math.fsum(x) / n
            my = math.fsum(y) / n
            sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
            sxx = math.fsum((a - mx) ** 2 for a in x)
            syy = math.fsum((b - my) ** 2 for b in y)
            textbook = sxy / math.sqrt(sxx * syy)
            worst = max(worst, abs(pearson(x, y) - textbook))
        ok = exact_ok and worst <= 1e-12
        report(
            8, ok,
            f"perfect lines give exactly +1.0/-1.0; max drift from "
            f"two-pass computation {worst:.2e} (limit 1e-12)",
        )

    def test_criterion_09_throughput(self, full_corpus, full_index):
        rng = random.Random(2025)
        vocab = synth_vocab(rng)
        weights = [1.0 / (rank + 1) for rank in range(len(vocab))]
        verses = list(full_corpus)
        texts = []
        for i in range(100_000):
            words = rng.choices(vocab, weights=weights, k=20)
            if i % 7 == 0:
                v = rng.choice(verses)
                n = rng.randint(3, min(12, len(v.norm_tokens)))
                start = rng.randint(0, len(v.norm_tokens) - n)
                extract = " ".join(v.norm_tokens[start : start + n])
                words = words[:10] + [".", extract, "."] + words[10:]
            texts.append(" ".join(words))

        started = time.perf_counter()
        matched = sum(1 for t in texts if extract_verses(full_index, t).matches)
        elapsed = time.perf_counter() - started
        ok = elapsed < 60.0 and matched > 0
        report(
            9, ok,
            f"100k tweets matched single-threaded in {elapsed:.2f}s "
            f"(limit 60s), {matched} tweets validated",
        )

    def test_criterion_10_determinism(self, full_corpus_path, full_corpus, tmp_path):
        rng = random.Random(9090)
        vocab = synth_vocab(rng, 2000)
        verses = list(full_corpus)
        objs = []
        for i in range(1, 2001):
            noise = " ".join(rng.choices(vocab, k=rng.randint(4, 16)))
            if i % 3 == 0:
                v = rng.choice(verses)
                n = rng.randint(3, min(10, len(v.norm_tokens)))
                start = rng.randint(0, len(v.norm_tokens) - n)
                extract = " ".join(v.norm_tokens[start : start + n])
                text = f"قال تعالى: {extract}. {noise}"
            elif i % 3 == 1:
                text = f"صدق الله العظيم. {noise}"
            else:
                text = noise
            objs.append(
                make_record(
                    i, text,
                    retweet_count=rng.randrange(6),
                    source="du3a.org" if i % 11 == 0 else "Twitter Web App",
                )
            )
        records = write_records(tmp_path / "tweets.jsonl", objs)
        labels = write_lines(
            tmp_path / "labels.csv",
            ["author_id,main_label,secondary_label"]
            + [f"u{k:05d},Personal,RCE" for k in range(0, 97, 3)],
        )

        runner = CliRunner()

        def run_bundle(name: str):
            out = tmp_path / name
            steps = [
                ["build-index", "--corpus", str(full_corpus_path),
                 "--out", str(out / "index")],
                ["filter", str(records), "--out", str(out / "filter")],
                ["extract", str(out / "filter" / "filtered.jsonl"),
                 "--index", str(out / "index" / "corpus_index.json"),
                 "--out", str(out / "extract")],
                ["analyze", "--matches", str(out / "extract" / "matches.tsv"),
                 "--tweets", str(out / "filter" / "filtered.jsonl"),
                 "--index", str(out / "index" / "corpus_index.json"),
                 "--labels", str(labels), "--out", str(out / "report")],
                ["sample", "--matches", str(out / "extract" / "matches.tsv"),
                 "--tweets", str(out / "filter" / "filtered.jsonl"),
                 "--n-full", "10", "--n-fragment", "10", "--seed", "11",
                 "--out", str(out / "sample")],
            ]
            for step in steps:
                result = runner.invoke(cli_main, step)
                assert result.exit_code == 0, (step[0], result.output)
            return out

        first = run_bundle("first")
        second = run_bundle("second")
        rel_first = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
        rel_second = sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
        identical = rel_first == rel_second and all(
            (first / rel).read_bytes() == (second / rel).read_bytes()
            for rel in rel_first
        )
        report(
            10, identical,
            f"two pipeline runs wrote {len(rel_first)} files each, "
            "byte-identical across runs",
        )
