"""Borrowing-likeliness scores from usage counts, plus the newspaper baseline.

The three usage ratios compare how often a word shows up in native-dominant
contexts (monolingual-L1 tweets, majority-L1 code-mixed tweets, L1 phrases)
against foreign-monolingual contexts:

    uur = (U_L1 + U_CML1) / U_L2     distinct users
    utr = (T_L1 + T_CML1) / T_L2     tweets
    upr = P_L1 / P_L2                phrases

The baseline scores a word by the log ratio of its transliterated-form
frequency to its translation's frequency in a reference corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .classify import TweetClass
from .corpus import LanguageTag, PhraseSpan, PhraseTag, TaggedTweet


@dataclass(frozen=True)
class WordUsageCounts:
    word: str
    u_l1: int = 0
    u_cml1: int = 0
    u_l2: int = 0
    t_l1: int = 0
    t_cml1: int = 0
    t_l2: int = 0
    p_l1: int = 0
    p_l2: int = 0


@dataclass(frozen=True)
class BaselineInputs:
    word: str
    translit_form: str
    translation_form: str
    f_l2: int  # reference-corpus frequency of translit_form
    f_l1: int  # reference-corpus frequency of translation_form


@dataclass(frozen=True)
class MetricScore:
    """Score carrier; denominator_zero marks any zero-denominator (or, for
    the baseline, zero raw count) input that shaped the value."""

    word: str
    value: float
    denominator_zero: bool = False


class MissingMapping(Exception):
    """Words absent from the translation map."""

    def __init__(self, words: Sequence[str]):
        self.words = tuple(sorted(words))
        super().__init__(f"no translation mapping for: {', '.join(self.words)}")


def derive_phrases(tweet: TaggedTweet) -> tuple[PhraseSpan, ...]:
    """Fallback phrase spans: maximal runs of identically tagged tokens.

    Only L1 and L2 runs become spans; NE/OTHER tokens break runs and yield
    no span of their own.
    """
    spans = []
    start = 0
    n = len(tweet.tokens)
    while start < n:
        tag = tweet.tokens[start].tag
        end = start + 1
        while end < n and tweet.tokens[end].tag is tag:
            end += 1
        if tag is LanguageTag.L1:
            spans.append(PhraseSpan(start, end, PhraseTag.L1))
        elif tag is LanguageTag.L2:
            spans.append(PhraseSpan(start, end, PhraseTag.L2))
        start = end
    return tuple(spans)


def effective_phrases(tweet: TaggedTweet) -> tuple[PhraseSpan, ...]:
    return tweet.phrases if tweet.phrases else derive_phrases(tweet)


# Tweet class -> (user/tweet) count column.
_CLASS_COLUMN = {
    TweetClass.MONO_L1: "l1",
    TweetClass.CM_L1: "cml1",
    TweetClass.MONO_L2: "l2",
}


def usage_counts(
    word: str,
    corpus: Iterable[TaggedTweet],
    classes: Mapping[str, TweetClass],
    user_subset: frozenset[str] | set[str] | None = None,
) -> WordUsageCounts:
    """Count the word's usage contexts across the corpus.

    Containment is case-insensitive token match. MONO_L1 / CM_L1 / MONO_L2
    tweets feed the L1 / CML1 / L2 user+tweet columns; other classes feed
    none. Phrase columns count L1/L2 phrase spans containing the word over
    all tweets (explicit spans when present, derived same-tag runs
    otherwise), regardless of tweet class.
    """
    word = word.lower()
    users: dict[str, set[str]] = {"l1": set(), "cml1": set(), "l2": set()}
    tweets = {"l1": 0, "cml1": 0, "l2": 0}
    phrases = {PhraseTag.L1: 0, PhraseTag.L2: 0}
    for tweet in corpus:
        if user_subset is not None and tweet.user_id not in user_subset:
            continue
        positions = [
            i for i, tok in enumerate(tweet.tokens) if tok.text.lower() == word
        ]
        if not positions:
            continue
        column = _CLASS_COLUMN.get(classes.get(tweet.id))
        if column is not None:
            users[column].add(tweet.user_id)
            tweets[column] += 1
        for span in effective_phrases(tweet):
            if span.tag is PhraseTag.OTHER:
                continue
            if any(span.start <= i < span.end for i in positions):
                phrases[span.tag] += 1
    return WordUsageCounts(
        word=word,
        u_l1=len(users["l1"]),
        u_cml1=len(users["cml1"]),
        u_l2=len(users["l2"]),
        t_l1=tweets["l1"],
        t_cml1=tweets["cml1"],
        t_l2=tweets["l2"],
        p_l1=phrases[PhraseTag.L1],
        p_l2=phrases[PhraseTag.L2],
    )


def cohort_counts(
    word: str,
    corpus: Iterable[TaggedTweet],
    classes: Mapping[str, TweetClass],
    user_subset: frozenset[str] | set[str],
) -> WordUsageCounts:
    """usage_counts restricted to tweets authored by the given users."""
    return usage_counts(word, corpus, classes, user_subset=user_subset)


def _ratio(word: str, numerator: int, denominator: int) -> MetricScore:
    if denominator > 0:
        return MetricScore(word, numerator / denominator, False)
    if numerator > 0:
        return MetricScore(word, math.inf, True)
    return MetricScore(word, 0.0, True)


def uur(counts: WordUsageCounts) -> MetricScore:
    return _ratio(counts.word, counts.u_l1 + counts.u_cml1, counts.u_l2)


def utr(counts: WordUsageCounts) -> MetricScore:
    return _ratio(counts.word, counts.t_l1 + counts.t_cml1, counts.t_l2)


def upr(counts: WordUsageCounts) -> MetricScore:
    return _ratio(counts.word, counts.p_l1, counts.p_l2)


def baseline_score(inputs: BaselineInputs, smoothing: float = 1.0) -> MetricScore:
    """ln((F_L2 + smoothing) / (F_L1 + smoothing)).

    With smoothing=0 a zero raw count makes the score undefined, so that
    combination raises; with smoothing the score stays finite and the flag
    records that a raw count was zero.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be >= 0")
    zero_raw = inputs.f_l1 == 0 or inputs.f_l2 == 0
    if smoothing == 0 and zero_raw:
        raise ValueError(
            f"word {inputs.word!r}: zero raw frequency needs smoothing > 0"
        )
    value = math.log((inputs.f_l2 + smoothing) / (inputs.f_l1 + smoothing))
    return MetricScore(inputs.word, value, zero_raw)


def load_translation_map(path: str | Path) -> dict[str, tuple[str, str]]:
    """TSV word<TAB>translit_form<TAB>translation_form ('#' comments allowed)."""
    mapping: dict[str, tuple[str, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            mapping[parts[0].lower()] = (parts[1], parts[2])
    return mapping


def load_frequency_table(path: str | Path) -> dict[str, int]:
    """TSV token<TAB>count reference frequency table."""
    freqs: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected token<TAB>count")
            freqs[parts[0]] = int(parts[1])
    return freqs


def build_baseline_inputs(
    words: Iterable[str],
    translation_map: Mapping[str, tuple[str, str]],
    frequencies: Mapping[str, int],
) -> dict[str, BaselineInputs]:
    """Assemble baseline inputs; unknown reference tokens count as 0."""
    words = [w.lower() for w in words]
    missing = [w for w in words if w not in translation_map]
    if missing:
        raise MissingMapping(missing)
    inputs = {}
    for word in words:
        translit, translation = translation_map[word]
        inputs[word] = BaselineInputs(
            word=word,
            translit_form=translit,
            translation_form=translation,
            f_l2=frequencies.get(translit, 0),
            f_l1=frequencies.get(translation, 0),
        )
    return inputs
