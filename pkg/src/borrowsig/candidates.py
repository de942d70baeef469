"""Target-word selection: frequency ranking, context features, clustering.

Candidate words are frequent foreign-tagged tokens inside code-mixed tweets.
Each candidate gets a 24-dim context profile: for the three code-mixed tweet
categories, the fraction of occurrences seen with each left/right neighbor
combination (neighbors are foreign, native, or the tweet boundary). The
profiles are clustered with seeded k-means, the elbow of the SSE curve picks
k, and the final sample mixes per-cluster baseline extremes with a random
middle draw.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classify import CODE_MIXED_CLASSES, TweetClass
from .corpus import LanguageTag, TaggedTweet


class EmptyCandidateSet(Exception):
    """Selection filters removed every candidate."""


@dataclass(frozen=True)
class CandidateWord:
    text: str
    foreign_freq: int


def select_candidates(
    corpus: Iterable[TaggedTweet],
    classes: Mapping[str, TweetClass],
    top_n: int = 1000,
    stopwords: frozenset[str] | set[str] = frozenset(),
    allowlist: frozenset[str] | set[str] | None = None,
) -> list[CandidateWord]:
    """Most frequent foreign words, counted only where they are foreign.

    Counts lowercased L2-tagged occurrences in code-mixed tweets (monolingual
    and code-switched tweets contribute nothing), keeps the top_n by count
    with lexicographic tie-break, then drops stopwords and, when given,
    keeps only allowlisted words.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    freq: dict[str, int] = {}
    for tweet in corpus:
        if classes.get(tweet.id) not in CODE_MIXED_CLASSES:
            continue
        for token in tweet.tokens:
            if token.tag is LanguageTag.L2:
                w = token.text.lower()
                freq[w] = freq.get(w, 0) + 1
    top = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    stop = {w.lower() for w in stopwords}
    selected = [(w, c) for w, c in top if w not in stop]
    if allowlist is not None:
        allowed = {w.lower() for w in allowlist}
        selected = [(w, c) for w, c in selected if w in allowed]
    if not selected:
        raise EmptyCandidateSet("no candidate words survive selection")
    return [CandidateWord(w, c) for w, c in selected]


# Context-feature column layout: per tweet category, one 8-slot block.
FEATURE_CATEGORIES = (TweetClass.CM_L2, TweetClass.CM_L1, TweetClass.CM_EQ)
CONTEXT_COMBOS = ("EE", "HH", "EH", "HE", "$E", "E$", "$H", "H$")
FEATURE_COLUMNS = tuple(
    f"{cat.value}:{combo}" for cat in FEATURE_CATEGORIES for combo in CONTEXT_COMBOS
)

_NEIGHBOR_SYMBOL = {LanguageTag.L2: "E", LanguageTag.L1: "H"}


@dataclass(frozen=True)
class ContextFeatureVector:
    word: str
    values: tuple[float, ...]  # 24 fractions, FEATURE_COLUMNS order
    category_counts: tuple[int, int, int]  # occurrences counted per category
    empty: bool  # no countable occurrence anywhere

    def __post_init__(self) -> None:
        if len(self.values) != len(FEATURE_COLUMNS):
            raise ValueError(f"expected {len(FEATURE_COLUMNS)} feature values")


def context_features(
    word: str,
    corpus: Iterable[TaggedTweet],
    classes: Mapping[str, TweetClass],
) -> ContextFeatureVector:
    """Neighbor-combination fractions for the word's foreign occurrences.

    Only L2-tagged occurrences in code-mixed tweets count. A neighbor is E
    (L2), H (L1) or $ (tweet boundary); occurrences with an NE/OTHER
    neighbor are skipped, as are single-token tweets. Each 8-slot category
    block is normalized by that category's occurrence count; blocks without
    occurrences stay all-zero.
    """
    word = word.lower()
    counts = {cat: {combo: 0 for combo in CONTEXT_COMBOS} for cat in FEATURE_CATEGORIES}
    totals = {cat: 0 for cat in FEATURE_CATEGORIES}
    for tweet in corpus:
        cat = classes.get(tweet.id)
        if cat not in FEATURE_CATEGORIES or len(tweet.tokens) < 2:
            continue
        for i, token in enumerate(tweet.tokens):
            if token.tag is not LanguageTag.L2 or token.text.lower() != word:
                continue
            before = _NEIGHBOR_SYMBOL.get(tweet.tokens[i - 1].tag) if i > 0 else "$"
            after = (
                _NEIGHBOR_SYMBOL.get(tweet.tokens[i + 1].tag)
                if i + 1 < len(tweet.tokens)
                else "$"
            )
            if before is None or after is None:
                continue
            counts[cat][before + after] += 1
            totals[cat] += 1
    values = []
    for cat in FEATURE_CATEGORIES:
        total = totals[cat]
        for combo in CONTEXT_COMBOS:
            values.append(counts[cat][combo] / total if total else 0.0)
    return ContextFeatureVector(
        word=word,
        values=tuple(values),
        category_counts=tuple(totals[cat] for cat in FEATURE_CATEGORIES),
        empty=all(t == 0 for t in totals.values()),
    )


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: tuple[tuple[float, ...], ...]
    assignment: dict[str, int]
    sse: float
    sse_history: tuple[float, ...]  # per Lloyd iteration, chosen k
    sse_by_k: dict[int, float]  # elbow curve (single entry when k forced)

    def members(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {c: [] for c in range(self.k)}
        for word, cid in self.assignment.items():
            out[cid].append(word)
        return out


def _nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _sse(points: np.ndarray, centroids: np.ndarray, assign: np.ndarray) -> float:
    return float(((points - centroids[assign]) ** 2).sum())


def _lloyd(
    points: np.ndarray, k: int, rng: random.Random, max_iter: int = 100
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Seeded k-means: greedy-spread init, then Lloyd to a fixpoint."""
    n = len(points)
    chosen = [rng.randrange(n)]
    min_d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(min_d2))  # argmax takes the lowest index on ties
        chosen.append(nxt)
        min_d2 = np.minimum(min_d2, ((points - points[nxt]) ** 2).sum(axis=1))
    centroids = points[chosen].astype(float).copy()
    assign = _nearest(points, centroids)
    history = [_sse(points, centroids, assign)]
    for _ in range(max_iter):
        for cid in range(k):
            members = points[assign == cid]
            if len(members):
                centroids[cid] = members.mean(axis=0)
            else:
                # repair: restart the empty cluster at the point farthest
                # from its currently assigned centroid
                dist = ((points - centroids[assign]) ** 2).sum(axis=1)
                centroids[cid] = points[int(np.argmax(dist))]
        new_assign = _nearest(points, centroids)
        sse = _sse(points, centroids, new_assign)
        if sse > history[-1] * (1 + 1e-9) + 1e-12:
            raise AssertionError("k-means SSE increased across an iteration")
        history.append(sse)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return centroids, assign, history


def cluster(
    features: Sequence[ContextFeatureVector],
    k_range: tuple[int, int] = (2, 8),
    seed: int = 0,
    forced_k: int | None = None,
) -> ClusterModel:
    """Cluster feature vectors; the SSE elbow picks k unless forced_k is set.

    The elbow is the interior k maximizing the second difference of the
    SSE-vs-k curve (smallest k wins ties). Runs are deterministic for a
    given seed.
    """
    if not features:
        raise ValueError("no feature vectors to cluster")
    words = [f.word for f in features]
    if len(set(words)) != len(words):
        raise ValueError("duplicate words among feature vectors")
    points = np.array([f.values for f in features], dtype=float)
    n = len(points)

    def run(k: int) -> tuple[np.ndarray, np.ndarray, list[float]]:
        return _lloyd(points, k, random.Random(f"kmeans:{seed}:{k}"))

    if forced_k is not None:
        if not 1 <= forced_k <= n:
            raise ValueError(f"forced k={forced_k} outside 1..{n}")
        centroids, assign, history = run(forced_k)
        chosen_k = forced_k
        sse_by_k = {forced_k: history[-1]}
    else:
        k_min, k_max = k_range
        if not 1 <= k_min < k_max:
            raise ValueError("k_range must satisfy 1 <= k_min < k_max")
        if k_max - k_min < 2:
            raise ValueError("k_range too narrow for an elbow (need 3 points)")
        if n < k_max + 1:
            raise ValueError(f"need more than k_max={k_max} points, got {n}")
        runs = {k: run(k) for k in range(k_min, k_max + 1)}
        sse_by_k = {k: runs[k][2][-1] for k in runs}
        chosen_k = max(
            range(k_min + 1, k_max),
            key=lambda k: (sse_by_k[k - 1] - 2 * sse_by_k[k] + sse_by_k[k + 1], -k),
        )
        centroids, assign, history = runs[chosen_k]
    return ClusterModel(
        k=chosen_k,
        centroids=tuple(tuple(float(x) for x in c) for c in centroids),
        assignment={w: int(c) for w, c in zip(words, assign)},
        sse=history[-1],
        sse_history=tuple(history),
        sse_by_k=sse_by_k,
    )


@dataclass(frozen=True)
class SamplePlan:
    hlws: tuple[str, ...]  # per-cluster baseline extremes
    mws: tuple[str, ...]  # random middle-valued draw
    full: tuple[str, ...]


def sample_targets(
    model: ClusterModel,
    baseline_scores: Mapping[str, float],
    mws_count: int,
    seed: int = 0,
) -> SamplePlan:
    """Combine per-cluster score extremes with a seeded middle-range draw.

    hlws takes the max- and min-scoring word of every cluster (deduplicated,
    so singleton clusters contribute one word). mws draws uniformly from the
    remaining words whose score falls strictly between the hlws extremes.
    """
    missing = sorted(w for w in model.assignment if w not in baseline_scores)
    if missing:
        raise ValueError(f"no baseline score for: {missing}")
    hlws: list[str] = []
    for cid, members in sorted(model.members().items()):
        if not members:
            continue
        top = sorted(members, key=lambda w: (-baseline_scores[w], w))[0]
        bottom = sorted(members, key=lambda w: (baseline_scores[w], w))[0]
        for word in (top, bottom):
            if word not in hlws:
                hlws.append(word)
    lo = min(baseline_scores[w] for w in hlws)
    hi = max(baseline_scores[w] for w in hlws)
    eligible = sorted(
        w
        for w in model.assignment
        if w not in hlws and lo < baseline_scores[w] < hi
    )
    if mws_count > len(eligible):
        raise ValueError(
            f"mws_count={mws_count} exceeds eligible pool of {len(eligible)}"
        )
    rng = random.Random(f"mws:{seed}")
    mws = rng.sample(eligible, mws_count)
    return SamplePlan(tuple(hlws), tuple(mws), tuple(hlws) + tuple(mws))
