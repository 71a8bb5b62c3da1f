"""Typo-mention analysis, search-rank probing and tweet-content risk checks.

A mention of a username variant counts as a typo when mentioner and
mentioned account are not within one hop of each other in the follow graph;
retweets and replies only propagate existing typos and are reported
separately, never classified.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol, Sequence

from .datasource import Friendship, MentionRecord, TweetKind
from .errors import BackendError, InputError
from .similarity import levenshtein

ED_BUCKETS = ("1", "2", "3", "4+")
UNCATEGORIZED = "uncategorized"


class TypoVerdict(enum.Enum):
    TYPO_MENTION = "typo_mention"
    PURPOSEFUL_MENTION = "purposeful_mention"
    UNKNOWN = "unknown"


CLASSIFIED_VERDICTS = (TypoVerdict.TYPO_MENTION, TypoVerdict.PURPOSEFUL_MENTION)


class RelationOracle(Protocol):
    def friendship(self, a: str, b: str,
                   either_direction: bool | None = None) -> Friendship: ...


def classify_mention(record: MentionRecord, oracle: RelationOracle,
                     either_direction: bool | None = None) -> TypoVerdict:
    """Verdict for one actual tweet: purposeful when the two accounts are
    within one hop, typo when unrelated, unknown when the oracle fails."""
    if record.kind is not TweetKind.ACTUAL_TWEET:
        raise InputError("only actual tweets receive typo verdicts")
    try:
        relation = oracle.friendship(record.mentioner, record.mentioned_variant,
                                     either_direction)
    except BackendError:
        relation = Friendship.UNKNOWN
    if relation is Friendship.UNKNOWN:
        return TypoVerdict.UNKNOWN
    if relation is Friendship.RELATED:
        return TypoVerdict.PURPOSEFUL_MENTION
    return TypoVerdict.TYPO_MENTION


def ed_bucket(distance: int) -> str:
    if distance <= 0:
        raise InputError(f"edit distance bucket undefined for {distance}")
    return str(distance) if distance <= 3 else "4+"


def _verdict_counts() -> dict[str, int]:
    return {v.value: 0 for v in CLASSIFIED_VERDICTS}


@dataclass
class TypoMentionReport:
    totals: dict[str, int] = field(
        default_factory=lambda: {v.value: 0 for v in TypoVerdict})
    by_category: dict[str, dict[str, int]] = field(default_factory=dict)
    by_ed_bucket: dict[str, dict[str, int]] = field(
        default_factory=lambda: {b: _verdict_counts() for b in ED_BUCKETS})
    excluded_kinds: dict[str, int] = field(default_factory=dict)

    def classified_total(self) -> int:
        return sum(self.totals.values())


def aggregate_typo_stats(records: Sequence[MentionRecord],
                         verdicts: Sequence[TypoVerdict],
                         categories: Mapping[str, str] | None = None) -> TypoMentionReport:
    """Counts per verdict, per seed category and per edit-distance bucket.

    records/verdicts run in parallel over the actual tweets; unknown verdicts
    appear in the totals but are discarded from the category and distance
    breakdowns. Retweets and replies must be pre-filtered by the caller via
    split_actual_tweets.
    """
    if len(records) != len(verdicts):
        raise InputError("records and verdicts length mismatch")
    categories = categories or {}
    report = TypoMentionReport()
    for record, verdict in zip(records, verdicts):
        report.totals[verdict.value] += 1
        if verdict is TypoVerdict.UNKNOWN:
            continue
        category = categories.get(record.seed.lower(), UNCATEGORIZED)
        per_cat = report.by_category.setdefault(category, _verdict_counts())
        per_cat[verdict.value] += 1
        bucket = ed_bucket(levenshtein(record.seed, record.mentioned_variant))
        report.by_ed_bucket[bucket][verdict.value] += 1
    return report


def split_actual_tweets(records: Iterable[MentionRecord]) -> tuple[list[MentionRecord], dict[str, int]]:
    """(actual tweets, counts of excluded retweets/replies)."""
    actual = []
    excluded: dict[str, int] = {}
    for record in records:
        if record.kind is TweetKind.ACTUAL_TWEET:
            actual.append(record)
        else:
            excluded[record.kind.value] = excluded.get(record.kind.value, 0) + 1
    return actual, excluded


# --- search-rank probing ------------------------------------------------------


@dataclass(frozen=True)
class RankProbeResult:
    seed: str
    prefix: str
    ranked_results: tuple[str, ...]
    seed_rank: int | None
    variant_ranks: dict[str, int]
    failed: bool = False
    error: str | None = None


class SearchBackend(Protocol):
    def search_users(self, prefix: str, limit: int = 1000) -> list[str]: ...


def search_rank_probe(datasource: SearchBackend, seed: str,
                      max_results: int = 1000,
                      variants: Iterable[str] | None = None) -> list[RankProbeResult]:
    """One probe per prefix of the seed (an n-char username issues n probes).

    Records the seed's 1-based rank and the rank of every known variant
    inside the first max_results results. A backend failure marks that probe
    failed; the remaining prefixes still run.
    """
    if not seed:
        raise InputError("seed must be nonempty")
    variant_keys = {v.lower() for v in variants} if variants is not None else None
    probes = []
    for length in range(1, len(seed) + 1):
        prefix = seed[:length]
        try:
            ranked = datasource.search_users(prefix, max_results)
        except BackendError as exc:
            probes.append(RankProbeResult(seed=seed, prefix=prefix,
                                          ranked_results=(), seed_rank=None,
                                          variant_ranks={}, failed=True,
                                          error=str(exc)))
            continue
        ranked = ranked[:max_results]
        seed_rank = None
        variant_ranks: dict[str, int] = {}
        for position, name in enumerate(ranked, 1):
            key = name.lower()
            if key == seed.lower():
                seed_rank = position if seed_rank is None else seed_rank
            elif variant_keys is None or key in variant_keys:
                variant_ranks.setdefault(name, position)
        probes.append(RankProbeResult(seed=seed, prefix=prefix,
                                      ranked_results=tuple(ranked),
                                      seed_rank=seed_rank,
                                      variant_ranks=variant_ranks))
    return probes


# --- tweet-content risk -------------------------------------------------------

_URL_RE = re.compile(r"https?://[^\s]+", re.IGNORECASE)
# "follow me" with slight variations: case-insensitive, up to 3 non-letter
# characters between the words, no letters bleeding into either word.
_FOLLOW_ME_RE = re.compile(r"(?<![a-z])follow[^a-z]{0,3}me(?![a-z])", re.IGNORECASE)


@dataclass
class ContentRiskReport:
    total_tweets: int
    urls: list[str]
    insecure_urls: list[str]
    follow_me_count: int
    follow_me_users: set[str] | None

    @property
    def url_count(self) -> int:
        return len(self.urls)

    @property
    def insecure_url_count(self) -> int:
        return len(self.insecure_urls)


def analyze_tweet_content(tweets: Sequence[str],
                          authors: Sequence[str] | None = None) -> ContentRiskReport:
    """Scan tweet texts for URLs (flagging non-HTTPS) and follow-me phrases.

    When parallel author metadata is supplied, the distinct users posting a
    follow-me phrase are reported too.
    """
    if authors is not None and len(authors) != len(tweets):
        raise InputError("authors and tweets length mismatch")
    urls: list[str] = []
    insecure: list[str] = []
    follow_me = 0
    follow_users: set[str] = set()
    for i, text in enumerate(tweets):
        for url in _URL_RE.findall(text):
            url = url.rstrip('.,;:!?)"\'')
            urls.append(url)
            if url.lower().startswith("http://"):
                insecure.append(url)
        if _FOLLOW_ME_RE.search(text):
            follow_me += 1
            if authors is not None:
                follow_users.add(authors[i])
    return ContentRiskReport(
        total_tweets=len(tweets),
        urls=urls,
        insecure_urls=insecure,
        follow_me_count=follow_me,
        follow_me_users=follow_users if authors is not None else None,
    )
