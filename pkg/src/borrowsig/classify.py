"""Tweet-level language-mix categories and per-user mixing extent.

Each tweet falls into exactly one of six categories based on its L1/L2
token mix: two monolingual classes, three code-mixed classes (majority L1,
majority L2, near-equal) and a single-switch code-switched class. NE and
OTHER tokens are invisible to the rules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .corpus import LanguageTag, TaggedTweet


class TweetClass(Enum):
    MONO_L1 = "MONO_L1"
    MONO_L2 = "MONO_L2"
    CM_L1 = "CM_L1"
    CM_L2 = "CM_L2"
    CM_EQ = "CM_EQ"
    CS = "CS"


CODE_MIXED_CLASSES = frozenset({TweetClass.CM_L1, TweetClass.CM_L2, TweetClass.CM_EQ})


class UnclassifiableTweet(Exception):
    """Tweet has too few L1/L2 content tokens to classify."""


@dataclass(frozen=True)
class ClassifierConfig:
    mono_threshold: float = 0.9
    eq_band: float = 0.05
    min_trail: int = 2
    min_content_tokens: int = 1

    def __post_init__(self) -> None:
        if not 0.5 < self.mono_threshold < 1:
            raise ValueError("mono_threshold must lie in (0.5, 1)")
        if not 0 <= self.eq_band < 0.5:
            raise ValueError("eq_band must lie in [0, 0.5)")
        if self.min_trail < 1:
            raise ValueError("min_trail must be >= 1")
        if self.min_content_tokens < 1:
            raise ValueError("min_content_tokens must be >= 1")


def classify_tags(
    tags: Sequence[LanguageTag], cfg: ClassifierConfig = ClassifierConfig()
) -> TweetClass:
    """Classify a tag sequence; NE/OTHER tokens are ignored entirely.

    Decision order: mono-L1, mono-L2 (both strict > mono_threshold), then
    code-switched (exactly two trails, each >= min_trail), then the
    near-equal band, then simple majority (strict > 50%).
    """
    content = [t for t in tags if t in (LanguageTag.L1, LanguageTag.L2)]
    if len(content) < cfg.min_content_tokens:
        raise UnclassifiableTweet(
            f"{len(content)} L1/L2 tokens, need >= {cfg.min_content_tokens}"
        )
    n1 = sum(1 for t in content if t is LanguageTag.L1)
    f1 = n1 / len(content)
    if f1 > cfg.mono_threshold:
        return TweetClass.MONO_L1
    if 1 - f1 > cfg.mono_threshold:
        return TweetClass.MONO_L2
    trails = [len(list(run)) for _, run in itertools.groupby(content)]
    if len(trails) == 2 and min(trails) >= cfg.min_trail:
        return TweetClass.CS
    if abs(f1 - 0.5) <= cfg.eq_band:
        return TweetClass.CM_EQ
    return TweetClass.CM_L1 if f1 > 0.5 else TweetClass.CM_L2


def classify_tweet(
    tweet: TaggedTweet, cfg: ClassifierConfig = ClassifierConfig()
) -> TweetClass:
    return classify_tags([t.tag for t in tweet.tokens], cfg)


@dataclass
class CorpusClassification:
    classes: dict[str, TweetClass] = field(default_factory=dict)
    histogram: dict[TweetClass, int] = field(
        default_factory=lambda: {c: 0 for c in TweetClass}
    )
    unclassifiable: list[str] = field(default_factory=list)

    def histogram_json(self) -> dict[str, int]:
        return {c.value: self.histogram[c] for c in TweetClass}


def classify_corpus(
    corpus: Iterable[TaggedTweet], cfg: ClassifierConfig = ClassifierConfig()
) -> CorpusClassification:
    """Classify every tweet; unclassifiable tweets are counted, not fatal."""
    result = CorpusClassification()
    for tweet in corpus:
        try:
            cls = classify_tweet(tweet, cfg)
        except UnclassifiableTweet:
            result.unclassifiable.append(tweet.id)
            continue
        result.classes[tweet.id] = cls
        result.histogram[cls] += 1
    return result


class MixBucket(Enum):
    HIGH = "HIGH"
    MID = "MID"
    LOW = "LOW"


@dataclass(frozen=True)
class UserMixProfile:
    user_id: str
    total_tweets: int
    code_mixed_tweets: int

    @property
    def mix_fraction(self) -> float:
        if self.total_tweets == 0:
            return 0.0
        return self.code_mixed_tweets / self.total_tweets


def user_mix_profiles(
    corpus: Iterable[TaggedTweet], classes: Mapping[str, TweetClass]
) -> dict[str, UserMixProfile]:
    """Per-user mixing profile over classified tweets.

    Tweets without an entry in `classes` (unclassifiable) count toward
    neither the numerator nor the denominator.
    """
    totals: dict[str, int] = {}
    mixed: dict[str, int] = {}
    for tweet in corpus:
        cls = classes.get(tweet.id)
        if cls is None:
            continue
        totals[tweet.user_id] = totals.get(tweet.user_id, 0) + 1
        if cls in CODE_MIXED_CLASSES:
            mixed[tweet.user_id] = mixed.get(tweet.user_id, 0) + 1
    return {
        user: UserMixProfile(user, total, mixed.get(user, 0))
        for user, total in totals.items()
    }


def user_mix_buckets(
    corpus: Iterable[TaggedTweet],
    classes: Mapping[str, TweetClass],
    low: float = 0.07,
    high: float = 0.20,
) -> dict[MixBucket, frozenset[str]]:
    """Partition users by code-mixed tweet fraction.

    HIGH: fraction > high; MID: low <= fraction <= high (boundaries land in
    MID); LOW: fraction < low.
    """
    if not 0 <= low <= high:
        raise ValueError("need 0 <= low <= high")
    buckets: dict[MixBucket, set[str]] = {b: set() for b in MixBucket}
    for user, profile in user_mix_profiles(corpus, classes).items():
        f = profile.mix_fraction
        if f > high:
            buckets[MixBucket.HIGH].add(user)
        elif f >= low:
            buckets[MixBucket.MID].add(user)
        else:
            buckets[MixBucket.LOW].add(user)
    return {b: frozenset(users) for b, users in buckets.items()}
