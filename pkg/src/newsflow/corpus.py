"""Post corpus ingestion, text cleaning and descriptive statistics."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)

REACTION_KINDS = ("likes", "shares", "comments", "retweets", "favorites")
KNOWN_PLATFORMS = ("twitter", "facebook")

_URL_TOKEN = re.compile(r"^(?:https?://|www\.)", re.IGNORECASE)
MIN_WORDS = 3


class CorpusError(ValueError):
    """Raised for unreadable or schema-violating corpus input."""


@dataclass(frozen=True)
class Platform:
    name: str

    def __post_init__(self):
        if not self.name:
            raise CorpusError("platform name must be non-empty")

    @property
    def is_other(self) -> bool:
        return self.name not in KNOWN_PLATFORMS

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ReactionCounts:
    likes: int = 0
    shares: int = 0
    comments: int = 0
    retweets: int = 0
    favorites: int = 0

    def __post_init__(self):
        for kind in REACTION_KINDS:
            value = getattr(self, kind)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise CorpusError(f"reaction {kind!r} must be a non-negative integer, got {value!r}")

    def as_dict(self) -> dict[str, int]:
        return {kind: getattr(self, kind) for kind in REACTION_KINDS}


@dataclass(frozen=True)
class MediaAccount:
    id: str
    display_name: str
    platform: Platform
    followers: int


@dataclass(frozen=True)
class Post:
    id: str
    account_id: str
    text: str
    timestamp: int
    reactions: ReactionCounts = field(default_factory=ReactionCounts)

    @property
    def hour(self) -> int:
        """UTC hour of day of the post."""
        return (self.timestamp // 3600) % 24


@dataclass(frozen=True)
class Corpus:
    accounts: Mapping[str, MediaAccount]
    posts: tuple[Post, ...]
    rejected: int = 0

    def __post_init__(self):
        seen = set()
        for post in self.posts:
            if post.id in seen:
                raise CorpusError(f"duplicate post id {post.id!r}")
            seen.add(post.id)
            if post.account_id not in self.accounts:
                raise CorpusError(f"post {post.id!r} references unknown account {post.account_id!r}")

    def __len__(self) -> int:
        return len(self.posts)

    def posts_by_account(self) -> dict[str, list[Post]]:
        grouped: dict[str, list[Post]] = {aid: [] for aid in sorted(self.accounts)}
        for post in self.posts:
            grouped[post.account_id].append(post)
        return grouped


def preprocess(raw_text: str) -> str | None:
    """Strip URL tokens and return the cleaned text, or None if rejected.

    Words are maximal non-whitespace runs, counted after URL removal; fewer
    than three words rejects the post.  The result is re-joined with single
    spaces, which makes the function idempotent.
    """
    words = [w for w in raw_text.split() if not _URL_TOKEN.match(w)]
    if len(words) < MIN_WORDS:
        return None
    return " ".join(words)


def _require(record: dict, key: str, kind, lineno: int, path) -> object:
    if key not in record:
        raise CorpusError(f"{path}:{lineno}: missing field {key!r}")
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        raise CorpusError(f"{path}:{lineno}: field {key!r} has wrong type {type(value).__name__}")
    return value


def _iter_records(path: Path) -> Iterable[tuple[int, dict]]:
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: record is not an object")
            yield lineno, record


def load_accounts(path) -> dict[str, MediaAccount]:
    path = Path(path)
    accounts: dict[str, MediaAccount] = {}
    for lineno, rec in _iter_records(path):
        aid = _require(rec, "id", str, lineno, path)
        name = _require(rec, "display_name", str, lineno, path)
        platform = _require(rec, "platform", str, lineno, path)
        followers = _require(rec, "followers", int, lineno, path)
        if not platform:
            raise CorpusError(f"{path}:{lineno}: empty platform name")
        if followers < 0:
            raise CorpusError(f"{path}:{lineno}: negative follower count")
        if aid in accounts:
            raise CorpusError(f"{path}:{lineno}: duplicate account id {aid!r}")
        accounts[aid] = MediaAccount(aid, name, Platform(platform), followers)
    return accounts


def load_corpus(posts_path, accounts_path) -> Corpus:
    """Read the posts and accounts files into a validated :class:`Corpus`.

    Schema violations, unknown accounts and duplicate post ids are hard
    errors naming the offending line.  Posts rejected by :func:`preprocess`
    are counted in ``Corpus.rejected`` and logged.
    """
    posts_path = Path(posts_path)
    accounts = load_accounts(accounts_path)
    posts: list[Post] = []
    seen: set[str] = set()
    rejected = 0
    for lineno, rec in _iter_records(posts_path):
        pid = _require(rec, "id", str, lineno, posts_path)
        aid = _require(rec, "account_id", str, lineno, posts_path)
        text = _require(rec, "text", str, lineno, posts_path)
        ts = _require(rec, "timestamp", int, lineno, posts_path)
        raw_reactions = rec.get("reactions", {})
        if not isinstance(raw_reactions, dict):
            raise CorpusError(f"{posts_path}:{lineno}: 'reactions' must be an object")
        unknown = set(raw_reactions) - set(REACTION_KINDS)
        if unknown:
            raise CorpusError(f"{posts_path}:{lineno}: unknown reaction kinds {sorted(unknown)}")
        try:
            reactions = ReactionCounts(**raw_reactions)
        except CorpusError as exc:
            raise CorpusError(f"{posts_path}:{lineno}: {exc}") from None
        if ts <= 0:
            raise CorpusError(f"{posts_path}:{lineno}: timestamp must be positive")
        if aid not in accounts:
            raise CorpusError(f"{posts_path}:{lineno}: unknown account {aid!r}")
        if pid in seen:
            raise CorpusError(f"{posts_path}:{lineno}: duplicate post id {pid!r}")
        seen.add(pid)
        cleaned = preprocess(text)
        if cleaned is None:
            rejected += 1
            logger.info("rejected post %s (line %d): fewer than %d words", pid, lineno, MIN_WORDS)
            continue
        posts.append(Post(pid, aid, cleaned, ts, reactions))
    if rejected:
        logger.warning("%d posts rejected by preprocessing", rejected)
    return Corpus(accounts, tuple(posts), rejected)


@dataclass(frozen=True)
class AccountSummary:
    account_id: str
    platform: str
    followers: int
    posts: int
    mean_reactions: dict[str, float]


@dataclass(frozen=True)
class CorpusStats:
    accounts: tuple[AccountSummary, ...]
    # column name -> (min, p25, median, p75, max)
    quantiles: dict[str, tuple[float, float, float, float, float]]


def _five_numbers(values) -> tuple[float, float, float, float, float]:
    q = np.quantile(np.asarray(values, dtype=float), [0.0, 0.25, 0.5, 0.75, 1.0])
    return tuple(float(v) for v in q)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    if not corpus.posts:
        raise CorpusError("empty corpus")
    rows = []
    for aid, posts in corpus.posts_by_account().items():
        account = corpus.accounts[aid]
        means = {}
        for kind in REACTION_KINDS:
            total = sum(getattr(p.reactions, kind) for p in posts)
            means[kind] = total / len(posts) if posts else 0.0
        rows.append(AccountSummary(aid, str(account.platform), account.followers, len(posts), means))
    quantiles = {"posts": _five_numbers([r.posts for r in rows])}
    for kind in REACTION_KINDS:
        quantiles[kind] = _five_numbers([r.mean_reactions[kind] for r in rows])
    return CorpusStats(tuple(rows), quantiles)


_PLATFORM_KINDS = {
    "facebook": ("likes", "shares", "comments"),
    "twitter": ("retweets", "favorites"),
}


def format_account_row(summary: AccountSummary) -> str:
    """One-line reaction summary using the kinds native to the platform."""
    kinds = _PLATFORM_KINDS.get(summary.platform, REACTION_KINDS)
    parts = [f"#{kind} (avg-{summary.mean_reactions[kind]:.0f})" for kind in kinds]
    return f"{summary.account_id} [{summary.platform}] posts={summary.posts} followers={summary.followers} " + " ".join(parts)
