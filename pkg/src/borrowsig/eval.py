"""Rank lists, rank correlation, bucket precision/recall, and survey statistics.

Everything here is pure and deterministic. Rank lists are descending by
score with tied scores sharing the average of their occupied positions;
+inf scores sort above every finite score.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import LanguageTag, TaggedTweet


BUCKET_LABELS = ("SB", "LB", "BL", "LM", "SM")
STRATUM_LABELS = ("TOP", "MID", "BOT")
CONTEXT_MODES = ("H_all", "H_most")
SURVEY_CHOICES = ("FOREIGN", "NATIVE", "NEITHER")


class WordSetMismatch(Exception):
    """Two rankings (or bucket sets) cover different word sets."""

    def __init__(self, only_first: Iterable[str], only_second: Iterable[str]):
        self.only_first = tuple(sorted(only_first))
        self.only_second = tuple(sorted(only_second))
        super().__init__(
            f"word sets differ; only in first: {list(self.only_first)}, "
            f"only in second: {list(self.only_second)}"
        )


@dataclass(frozen=True)
class RankedItem:
    word: str
    score: float
    rank: float


@dataclass(frozen=True)
class RankList:
    items: tuple[RankedItem, ...]

    def __len__(self) -> int:
        return len(self.items)

    def words(self) -> tuple[str, ...]:
        return tuple(item.word for item in self.items)

    def ranks(self) -> dict[str, float]:
        return {item.word: item.rank for item in self.items}

    def scores(self) -> dict[str, float]:
        return {item.word: item.score for item in self.items}


def rank(scores: Mapping[str, float]) -> RankList:
    """Descending rank list with tie-averaged rank positions.

    Equal scores are listed lexicographically but share one averaged rank;
    +inf scores precede all finite ones. NaN scores are rejected.
    """
    if not scores:
        raise ValueError("cannot rank an empty score map")
    for word, score in scores.items():
        if math.isnan(score):
            raise ValueError(f"NaN score for {word!r}")
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    items: list[RankedItem] = []
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j][1] == ordered[i][1]:
            j += 1
        # positions i+1 .. j occupied by this tie group
        avg = (i + 1 + j) / 2
        for word, score in ordered[i:j]:
            items.append(RankedItem(word, score, avg))
        i = j
    return RankList(tuple(items))


def _check_same_words(words1: Iterable[str], words2: Iterable[str]) -> None:
    s1, s2 = set(words1), set(words2)
    if s1 != s2:
        raise WordSetMismatch(s1 - s2, s2 - s1)


def spearman(r1: RankList, r2: RankList) -> float:
    """Tie-correct Spearman's rho: Pearson correlation of the rank vectors.

    Returns NaN when either rank vector has zero variance (all items tied).
    """
    _check_same_words(r1.words(), r2.words())
    ranks2 = r2.ranks()
    x = [item.rank for item in r1.items]
    y = [ranks2[item.word] for item in r1.items]
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.fsum((a - mx) ** 2 for a in x)
    vy = math.fsum((b - my) ** 2 for b in y)
    if vx == 0 or vy == 0:
        return math.nan
    return cov / math.sqrt(vx * vy)


@dataclass(frozen=True)
class BucketSet:
    """Five ordered 20% slices of a rank list, best-ranked first."""

    by_label: dict[str, tuple[str, ...]]

    def label_of(self) -> dict[str, str]:
        return {w: label for label, words in self.by_label.items() for w in words}

    def all_words(self) -> set[str]:
        return {w for words in self.by_label.values() for w in words}


def buckets(ranking: RankList) -> BucketSet:
    """Split a rank list into the five SB/LB/BL/LM/SM ranges.

    Bucket k (1-based) holds list positions floor((k-1)n/5)+1 .. floor(kn/5),
    which reproduces sizes like [11, 11, 12, 11, 12] for n=57.
    """
    n = len(ranking)
    if n < 5:
        raise ValueError(f"need at least 5 items to bucket, got {n}")
    words = ranking.words()
    out: dict[str, tuple[str, ...]] = {}
    for k, label in enumerate(BUCKET_LABELS, start=1):
        lo = (k - 1) * n // 5
        hi = k * n // 5
        out[label] = words[lo:hi]
    return BucketSet(out)


@dataclass(frozen=True)
class BucketConfusion:
    tp: int
    fp: int
    tn: int  # kept with the source naming; counts truth-bucket words the
    # prediction missed, i.e. what a textbook would call false negatives
    precision: float
    recall: float


@dataclass(frozen=True)
class BucketEvalResult:
    per_bucket: dict[str, BucketConfusion]
    macro_precision: float
    macro_recall: float
    micro_precision: float
    micro_recall: float


def bucket_eval(pred: BucketSet, truth: BucketSet) -> BucketEvalResult:
    """Bucket-wise and aggregate precision/recall of pred against truth."""
    _check_same_words(pred.all_words(), truth.all_words())
    per_bucket = {}
    sum_tp = sum_fp = sum_tn = 0
    for label in BUCKET_LABELS:
        b = set(pred.by_label[label])
        g = set(truth.by_label[label])
        tp = len(b & g)
        fp = len(b - g)
        tn = len(g - b)
        precision = tp / (fp + tp) if fp + tp else 0.0
        recall = tp / (tn + tp) if tn + tp else 0.0
        per_bucket[label] = BucketConfusion(tp, fp, tn, precision, recall)
        sum_tp += tp
        sum_fp += fp
        sum_tn += tn
    k = len(BUCKET_LABELS)
    return BucketEvalResult(
        per_bucket=per_bucket,
        macro_precision=sum(c.precision for c in per_bucket.values()) / k,
        macro_recall=sum(c.recall for c in per_bucket.values()) / k,
        micro_precision=sum_tp / (sum_tp + sum_fp) if sum_tp + sum_fp else 0.0,
        micro_recall=sum_tp / (sum_tp + sum_tn) if sum_tp + sum_tn else 0.0,
    )


@dataclass(frozen=True)
class SurveyTally:
    word: str
    count_en: int
    count_hi: int
    count_none: int

    @property
    def lpf(self) -> int:
        return self.count_en - self.count_hi


def lpf_rank(tallies: Sequence[SurveyTally]) -> RankList:
    """Ground-truth ranking by language preference factor."""
    words = [t.word for t in tallies]
    if len(set(words)) != len(words):
        dupes = sorted({w for w in words if words.count(w) > 1})
        raise ValueError(f"duplicate survey tallies for: {dupes}")
    return rank({t.word: float(t.lpf) for t in tallies})


def tally_responses(responses: Iterable[tuple[str, str]]) -> list[SurveyTally]:
    """Aggregate (word, choice) pairs into per-word tallies, word-sorted."""
    counts: dict[str, dict[str, int]] = {}
    for word, choice in responses:
        if choice not in SURVEY_CHOICES:
            raise ValueError(f"unknown survey choice {choice!r}")
        row = counts.setdefault(word, {c: 0 for c in SURVEY_CHOICES})
        row[choice] += 1
    return [
        SurveyTally(word, row["FOREIGN"], row["NATIVE"], row["NEITHER"])
        for word, row in sorted(counts.items())
    ]


def cohort_split(
    responses: Iterable[tuple[int, str, str]], age_cut: int = 30
) -> tuple[list[SurveyTally], list[SurveyTally]]:
    """Split (age, word, choice) responses into young (< age_cut) and elder."""
    young: list[tuple[str, str]] = []
    elder: list[tuple[str, str]] = []
    for age, word, choice in responses:
        (young if age < age_cut else elder).append((word, choice))
    return tally_responses(young), tally_responses(elder)


def reannotation_strata(
    ranking: RankList, per_stratum: int = 20, seed: int | str = 0
) -> dict[str, list[str]]:
    """Seeded draw of per_stratum words from the top/middle/bottom 20% slices."""
    slices = buckets(ranking)
    source = {"TOP": "SB", "MID": "BL", "BOT": "SM"}
    rng = random.Random(f"strata:{seed}")
    out: dict[str, list[str]] = {}
    for stratum in STRATUM_LABELS:
        pool = list(slices.by_label[source[stratum]])
        if len(pool) < per_stratum:
            raise ValueError(
                f"{stratum} slice has {len(pool)} words, need {per_stratum}"
            )
        out[stratum] = rng.sample(pool, per_stratum)
    return out


@dataclass(frozen=True)
class ContextPick:
    word: str
    tweet_id: str
    target_index: int


def sample_context_tweets(
    words: Sequence[str],
    corpus: Iterable[TaggedTweet],
    mode: str,
    seed: int | str = 0,
) -> tuple[dict[str, ContextPick], list[str]]:
    """Pick one qualifying tweet per word for re-annotation.

    A tweet qualifies for a word when some L2-tagged token matches the word
    and the remaining L1/L2 tokens are all L1 (H_all) or majority L1, strict
    > 50% (H_most). Words without a qualifying tweet land in the shortfall
    list instead of failing the whole draw.
    """
    if mode not in CONTEXT_MODES:
        raise ValueError(f"mode must be one of {CONTEXT_MODES}")
    want = [w.lower() for w in words]
    candidates: dict[str, list[tuple[str, int]]] = {w: [] for w in want}
    for tweet in corpus:
        for word in want:
            index = _qualifying_position(tweet, word, mode)
            if index is not None:
                candidates[word].append((tweet.id, index))
    picks: dict[str, ContextPick] = {}
    shortfall: list[str] = []
    rng = random.Random(f"context:{mode}:{seed}")
    for word in want:
        pool = candidates[word]
        if not pool:
            shortfall.append(word)
            continue
        tweet_id, index = pool[rng.randrange(len(pool))]
        picks[word] = ContextPick(word, tweet_id, index)
    return picks, shortfall


def _qualifying_position(tweet: TaggedTweet, word: str, mode: str) -> int | None:
    """First token position making the tweet qualify for the word, if any."""
    for i, token in enumerate(tweet.tokens):
        if token.tag is not LanguageTag.L2 or token.text.lower() != word:
            continue
        rest = [
            t.tag
            for j, t in enumerate(tweet.tokens)
            if j != i and t.tag in (LanguageTag.L1, LanguageTag.L2)
        ]
        n1 = sum(1 for t in rest if t is LanguageTag.L1)
        if mode == "H_all":
            if n1 == len(rest):
                return i
        else:
            if rest and n1 / len(rest) > 0.5:
                return i
    return None


def fleiss_kappa(table: Sequence[Sequence[int]]) -> float:
    """Fleiss' kappa for an items x categories count table.

    Every row must sum to the same number of raters (>= 2). A table in
    perfect agreement returns exactly 1.0, chance-expected-agreement
    degeneracy included.
    """
    if not table:
        raise ValueError("empty table")
    n_raters = sum(table[0])
    if n_raters < 2:
        raise ValueError("need >= 2 raters")
    for row in table:
        if sum(row) != n_raters:
            raise ValueError("rows must share one rater count")
    n_items = len(table)
    n_categories = len(table[0])
    p_agree = [
        (sum(c * c for c in row) - n_raters) / (n_raters * (n_raters - 1))
        for row in table
    ]
    p_bar = math.fsum(p_agree) / n_items
    if p_bar == 1.0:
        return 1.0
    totals = [
        sum(row[j] for row in table) / (n_items * n_raters)
        for j in range(n_categories)
    ]
    p_expected = math.fsum(p * p for p in totals)
    return (p_bar - p_expected) / (1 - p_expected)


@dataclass(frozen=True)
class ReannotationStat:
    stratum: str
    context: str
    mu: float
    sigma: float
    kappa: float | None
    kappa_note: str | None = None
    n_words: int = 0


def reannotation_stats(
    records: Iterable[tuple[str, str, str, str, bool]],
) -> list[ReannotationStat]:
    """Per (stratum, context) flip statistics from re-annotation judgments.

    Records are (word, stratum, context, annotator, flipped). mu/sigma are
    the mean and population standard deviation of per-word flip fractions.
    Kappa uses the binary keep/flip table over words that carry the group's
    full annotator count; groups where no usable words remain report kappa
    as unavailable.
    """
    grouped: dict[tuple[str, str], dict[str, dict[str, bool]]] = {}
    for word, stratum, context, annotator, flipped in records:
        group = grouped.setdefault((stratum, context), {})
        votes = group.setdefault(word, {})
        if annotator in votes:
            raise ValueError(
                f"duplicate judgment: {annotator!r} on {word!r} ({stratum}/{context})"
            )
        votes[annotator] = bool(flipped)
    def group_key(key: tuple[str, str]) -> tuple[int, str]:
        stratum, context = key
        order = (
            STRATUM_LABELS.index(stratum)
            if stratum in STRATUM_LABELS
            else len(STRATUM_LABELS)
        )
        return order, context

    stats = []
    for (stratum, context), group in sorted(
        grouped.items(), key=lambda kv: group_key(kv[0])
    ):
        fractions = []
        for votes in group.values():
            fractions.append(sum(votes.values()) / len(votes))
        mu = math.fsum(fractions) / len(fractions)
        sigma = math.sqrt(
            math.fsum((f - mu) ** 2 for f in fractions) / len(fractions)
        )
        full = max(len(votes) for votes in group.values())
        table = [
            [sum(votes.values()), full - sum(votes.values())]
            for votes in group.values()
            if len(votes) == full
        ]
        excluded = len(group) - len(table)
        kappa: float | None
        note: str | None
        if full < 2:
            kappa, note = None, "single annotator, agreement undefined"
        else:
            kappa = fleiss_kappa(table)
            note = (
                f"{excluded} word(s) below {full} annotators excluded"
                if excluded
                else None
            )
        stats.append(
            ReannotationStat(
                stratum=stratum,
                context=context,
                mu=mu,
                sigma=sigma,
                kappa=kappa,
                kappa_note=note,
                n_words=len(group),
            )
        )
    return stats
