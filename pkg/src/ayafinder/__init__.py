"""Quran verse detection and sharing analytics for Arabic social media text."""

from .analytics import (
    AccountProfile,
    CategoryDistribution,
    GroupedDistribution,
    LeaderboardEntry,
    MatchEvent,
    RetweetHistogram,
    ReviewSample,
    VerseLeaderboard,
    build_account_profiles,
    category_distribution,
    events_from_matches,
    fit_power_law,
    follower_retweet_correlation,
    grouped_distribution,
    load_labels,
    pearson,
    quran_baseline,
    retweet_histogram,
    sample_for_review,
    select_influential,
    top_verses,
)
from .corpus import (
    CORPUS_FORMATS,
    TOTAL_SURAS,
    TOTAL_VERSES,
    Category,
    QuranCorpus,
    Verse,
    VerseRef,
    category_counts,
    corpus_content_hash,
    load_categories,
    load_corpus,
    load_corpus_artifact,
    parse_category,
    save_corpus_artifact,
)
from .errors import (
    AyafinderError,
    CorpusIncomplete,
    DegenerateInput,
    DuplicateVerse,
    EmptyDataset,
    InvalidArtifact,
    MalformedLine,
    SchemaViolation,
    UnknownCategory,
    UnknownGroupKey,
    UnknownVerseRef,
)
from .ingest import (
    DEFAULT_APP_REGISTRY,
    DEFAULT_KEY_PHRASES,
    DatasetPartition,
    KeyPhraseSet,
    SideStats,
    TweetRecord,
    detect_app_tweet,
    fold_retweets,
    hashtag_filter,
    keyphrase_filter,
    load_app_registry,
    load_key_phrases,
    parse_record,
    partition,
    partition_with_counts,
    read_records,
)
from .matching import (
    MatchIndex,
    MatchKind,
    MatchList,
    MatchResult,
    VerseMatcher,
    build_index,
    extract_verses,
    match_sentence,
)
from .normalize import (
    SENTENCE_DELIMITERS,
    ArabicNormalizer,
    NormalizedText,
    normalize,
    split_sentences,
    tokenize,
)

__version__ = "0.1.0"
