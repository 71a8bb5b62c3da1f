"""Data-source layer: account lookup, tweets, friendship and prefix search.

The reference backend is a deterministic file-based fixture store; live
backends implement the same interface behind a sliding-window rate limiter
with exponential backoff. Fixture responses are read-only after load and
safe to share across threads.
"""

from __future__ import annotations

import csv
import enum
import json
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import BackendError, InputError
from .features import AccountRecord, AccountStatus
from .genmodels import VariantRecord
from .similarity import EmbeddingStore, read_embeddings

DEFAULT_TWEET_FETCH = 500
DEFAULT_LOOKUP_BATCH = 100


class TweetKind(enum.Enum):
    ACTUAL_TWEET = "actual_tweet"
    RETWEET = "retweet"
    REPLY = "reply"


@dataclass(frozen=True)
class MentionRecord:
    tweet_id: str
    mentioner: str
    mentioned_variant: str
    seed: str
    kind: TweetKind
    like_count: int = 0
    retweet_count: int = 0
    text: str = ""

    def __post_init__(self) -> None:
        if self.mentioned_variant.lower() == self.seed.lower():
            raise InputError(f"tweet {self.tweet_id}: mentioned variant equals seed")


class Friendship(enum.Enum):
    RELATED = "related"
    UNRELATED = "unrelated"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class LookupEntry:
    status: AccountStatus
    record: AccountRecord | None = None
    error: str | None = None


@dataclass(frozen=True)
class RateLimitPolicy:
    max_requests_per_window: int = 300
    window_seconds: float = 900.0
    backoff_base: float = 1.0
    backoff_cap: float = 60.0
    jitter_fraction: float = 0.1
    max_retries: int = 3

    def __post_init__(self) -> None:
        if self.max_requests_per_window < 1 or self.window_seconds <= 0:
            raise InputError("rate limit quantities must be positive")
        if not (0.0 <= self.jitter_fraction <= 1.0):
            raise InputError("jitter_fraction must be in [0, 1]")


class RateLimiter:
    """Sliding-window limiter: at most N acquisitions in any window.

    Clock and sleep are injectable so tests can drive a simulated timeline.
    """

    def __init__(self, policy: RateLimitPolicy,
                 clock: Callable[[], float] = time.monotonic,
                 sleeper: Callable[[float], None] = time.sleep) -> None:
        self.policy = policy
        self.clock = clock
        self.sleeper = sleeper
        self._issued: list[float] = []

    def acquire(self) -> None:
        while True:
            now = self.clock()
            horizon = now - self.policy.window_seconds
            self._issued = [t for t in self._issued if t > horizon]
            if len(self._issued) < self.policy.max_requests_per_window:
                self._issued.append(now)
                return
            self.sleeper(self._issued[0] + self.policy.window_seconds - now)

    def backoff_delay(self, attempt: int, jitter: float = 0.0) -> float:
        """Exponential delay for retry `attempt` (0-based) with bounded jitter."""
        base = min(self.policy.backoff_cap, self.policy.backoff_base * (2 ** attempt))
        return base * (1.0 + max(-1.0, min(1.0, jitter)) * self.policy.jitter_fraction)


def _tweet_sort_key(record: MentionRecord) -> tuple[int, str]:
    # Monotone ids sort newest-first under (length, value) descending.
    return (len(record.tweet_id), record.tweet_id)


class FixtureDataSource:
    """Deterministic local store backing every data-source operation.

    Directory layout: accounts.jsonl, statuses.csv, edges.csv, tweets.jsonl,
    embeddings.vec. All files optional except accounts.jsonl.
    """

    def __init__(self, accounts: Iterable[AccountRecord],
                 follow_edges: Iterable[tuple[str, str]] = (),
                 tweets: Iterable[MentionRecord] = (),
                 embeddings: EmbeddingStore | None = None,
                 statuses: dict[str, AccountStatus] | None = None,
                 friendship_either_direction: bool = True) -> None:
        self.accounts = {rec.username.lower(): rec for rec in accounts}
        self.follow_edges = {(a.lower(), b.lower()) for a, b in follow_edges}
        for follower, followee in self.follow_edges:
            if follower not in self.accounts or followee not in self.accounts:
                raise InputError(f"edge ({follower}, {followee}) references "
                                 "an unknown account")
        self.tweets = sorted(tweets, key=_tweet_sort_key, reverse=True)
        self.embeddings = embeddings
        self.statuses = {k.lower(): v for k, v in (statuses or {}).items()}
        for name, status in self.statuses.items():
            if status is AccountStatus.ACTIVE and name not in self.accounts:
                raise InputError(f"status file marks {name} active but "
                                 "accounts.jsonl has no record")
        self.friendship_either_direction = friendship_either_direction

    # -- lookups ---------------------------------------------------------

    def status_of(self, username: str) -> AccountStatus:
        key = username.lower()
        if key in self.statuses:
            return self.statuses[key]
        if key in self.accounts:
            return AccountStatus.ACTIVE
        return AccountStatus.NOT_FOUND

    def lookup_accounts(self, usernames: Sequence[str],
                        batch_size: int = DEFAULT_LOOKUP_BATCH) -> dict[str, LookupEntry]:
        if not usernames:
            raise InputError("lookup batch must be nonempty")
        result: dict[str, LookupEntry] = {}
        for start in range(0, len(usernames), batch_size):
            for name in usernames[start:start + batch_size]:
                if name in result:
                    continue
                status = self.status_of(name)
                record = self.accounts.get(name.lower()) if status is AccountStatus.ACTIVE else None
                result[name] = LookupEntry(status=status, record=record)
        return result

    # -- tweets ----------------------------------------------------------

    def fetch_recent_tweets(self, username: str,
                            n: int = DEFAULT_TWEET_FETCH) -> tuple[list[MentionRecord], str]:
        """Tweets authored by the username, newest first; a status note
        explains empty results for suspended/unknown authors."""
        if n < 1:
            raise InputError("n must be >= 1")
        status = self.status_of(username)
        if status is not AccountStatus.ACTIVE:
            return [], f"author {username} is {status.value}"
        key = username.lower()
        out = [t for t in self.tweets if t.mentioner.lower() == key]
        return out[:n], "ok"

    def mentions_of(self, variant: str, n: int = DEFAULT_TWEET_FETCH) -> list[MentionRecord]:
        """Tweets mentioning the variant, newest first."""
        if n < 1:
            raise InputError("n must be >= 1")
        key = variant.lower()
        return [t for t in self.tweets if t.mentioned_variant.lower() == key][:n]

    # -- friendship --------------------------------------------------------

    def follows(self, follower: str, followee: str) -> bool | None:
        return (follower.lower(), followee.lower()) in self.follow_edges

    def friendship(self, a: str, b: str,
                   either_direction: bool | None = None) -> Friendship:
        either = (self.friendship_either_direction
                  if either_direction is None else either_direction)
        forward = self.follows(a, b)
        backward = self.follows(b, a)
        if forward is None or (either and backward is None):
            return Friendship.UNKNOWN
        related = forward or (either and backward)
        return Friendship.RELATED if related else Friendship.UNRELATED

    # -- search ------------------------------------------------------------

    def search_users(self, prefix: str, limit: int = 1000) -> list[str]:
        """Usernames with the prefix, ordered by followers descending then
        username ascending, truncated to the limit."""
        if not prefix:
            raise InputError("search prefix must be nonempty")
        key = prefix.lower()
        matches = [rec for name, rec in self.accounts.items()
                   if name.startswith(key)
                   and self.status_of(name) is AccountStatus.ACTIVE]
        matches.sort(key=lambda rec: (-rec.followers_count, rec.username.lower()))
        return [rec.username for rec in matches[:limit]]


@dataclass
class VariantPartition:
    active: list[tuple[VariantRecord, AccountRecord]] = field(default_factory=list)
    suspended: list[VariantRecord] = field(default_factory=list)
    not_found: list[VariantRecord] = field(default_factory=list)
    unresolved: list[tuple[VariantRecord, str]] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {"active": len(self.active), "suspended": len(self.suspended),
                "not_found": len(self.not_found), "unresolved": len(self.unresolved)}


def filter_variants(variants: Sequence[VariantRecord],
                    ds: FixtureDataSource,
                    batch_size: int = DEFAULT_LOOKUP_BATCH) -> VariantPartition:
    """Exhaustive, disjoint partition of generated variants by account status."""
    partition = VariantPartition()
    if not variants:
        return partition
    names = [v.username for v in variants]
    lookup = ds.lookup_accounts(names, batch_size=batch_size)
    for variant in variants:
        entry = lookup[variant.username]
        if entry.error is not None:
            partition.unresolved.append((variant, entry.error))
        elif entry.status is AccountStatus.ACTIVE:
            assert entry.record is not None
            partition.active.append((variant, entry.record))
        elif entry.status is AccountStatus.SUSPENDED:
            partition.suspended.append(variant)
        else:
            partition.not_found.append(variant)
    return partition


# --- fixture directory loading --------------------------------------------------

ACCOUNT_FIELDS = ("username", "profile_name", "bio", "url", "location",
                  "friends_count", "followers_count", "tweet_count",
                  "retweet_count", "is_private", "embedding_ref")


def _account_from_json(payload: dict) -> AccountRecord:
    unknown = set(payload) - set(ACCOUNT_FIELDS)
    if unknown:
        raise InputError(f"accounts.jsonl: unknown fields {sorted(unknown)}")
    if "username" not in payload:
        raise InputError("accounts.jsonl: record without username")
    return AccountRecord(
        username=payload["username"],
        profile_name=payload.get("profile_name", ""),
        bio=payload.get("bio", ""),
        url=payload.get("url", ""),
        location=payload.get("location", ""),
        friends_count=int(payload.get("friends_count", 0)),
        followers_count=int(payload.get("followers_count", 0)),
        tweet_count=int(payload.get("tweet_count", 0)),
        retweet_count=int(payload.get("retweet_count", 0)),
        is_private=bool(payload.get("is_private", False)),
        embedding_ref=payload.get("embedding_ref"),
    )


def load_fixture_dir(path: str) -> FixtureDataSource:
    accounts_path = os.path.join(path, "accounts.jsonl")
    if not os.path.exists(accounts_path):
        raise InputError(f"fixture dir {path}: accounts.jsonl is required")
    accounts = []
    with open(accounts_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                accounts.append(_account_from_json(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise InputError(f"accounts.jsonl:{lineno}: {exc}") from None

    statuses: dict[str, AccountStatus] = {}
    statuses_path = os.path.join(path, "statuses.csv")
    if os.path.exists(statuses_path):
        with open(statuses_path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    statuses[row["username"]] = AccountStatus(row["status"])
                except (KeyError, ValueError):
                    raise InputError(f"statuses.csv: bad row {row}") from None

    edges: list[tuple[str, str]] = []
    edges_path = os.path.join(path, "edges.csv")
    if os.path.exists(edges_path):
        with open(edges_path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    edges.append((row["follower"], row["followee"]))
                except KeyError:
                    raise InputError(f"edges.csv: bad row {row}") from None

    tweets: list[MentionRecord] = []
    tweets_path = os.path.join(path, "tweets.jsonl")
    if os.path.exists(tweets_path):
        with open(tweets_path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                payload = json.loads(line)
                tweets.append(MentionRecord(
                    tweet_id=str(payload["tweet_id"]),
                    mentioner=payload["mentioner"],
                    mentioned_variant=payload["mentioned_variant"],
                    seed=payload["seed"],
                    kind=TweetKind(payload.get("kind", "actual_tweet")),
                    like_count=int(payload.get("like_count", 0)),
                    retweet_count=int(payload.get("retweet_count", 0)),
                    text=payload.get("text", ""),
                ))

    embeddings = None
    emb_path = os.path.join(path, "embeddings.vec")
    if os.path.exists(emb_path):
        embeddings = read_embeddings(emb_path)

    return FixtureDataSource(accounts=accounts, follow_edges=edges,
                             tweets=tweets, embeddings=embeddings,
                             statuses=statuses)


def retry_with_backoff(fn: Callable[[], object], limiter: RateLimiter,
                       rng: Callable[[], float] = lambda: 0.0,
                       describe: str = "request") -> object:
    """Run fn under the limiter, retrying transient failures with backoff.

    Intended for live adapters; the fixture backend never raises. rng feeds
    the jitter in [-1, 1].
    """
    attempts = limiter.policy.max_retries + 1
    last: Exception | None = None
    for attempt in range(attempts):
        limiter.acquire()
        try:
            return fn()
        except BackendError as exc:
            last = exc
            if attempt + 1 < attempts:
                limiter.sleeper(limiter.backoff_delay(attempt, rng()))
    raise BackendError(f"{describe} failed after {attempts} attempts: {last}")
