"""Deterministic synthetic corpus with a planted borrowing signal.

The real study data (tweet crawl, newspaper counts, survey answers) is not
redistributable, so acceptance runs on generated corpora instead. Planted
words get a borrowedness level in [0, 1]; high levels translate into many
distinct users writing the word inside native-dominant tweets, low levels
into mostly foreign-monolingual usage. Context layouts also follow the
level (borrowed words tend to sit between native neighbors), which gives
the clustering stage real structure. The emitted reference-frequency table
is deliberately uncorrelated noise, so the log-frequency baseline ranks the
planted words poorly while the usage ratios recover them.

Users come in three pools: the first third authors the majority-native
code-mixed tweets, the middle third the majority-foreign ones, and the last
third only monolingual content, so the mixing-extent buckets are populated.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import (
    LanguageTag,
    PhraseSpan,
    PhraseTag,
    TaggedTweet,
    Token,
    tweet_to_record,
)

BORROWED_POOL = (
    "film", "school", "ticket", "road", "hotel", "doctor", "police", "train",
    "bank", "phone", "market", "office", "college", "hospital", "station",
    "party", "vote", "camera", "engine", "petrol", "bottle", "glass",
    "pencil", "paper", "cricket", "number", "minute", "machine", "button",
    "motor",
)

MIXED_POOL = (
    "thing", "way", "moment", "reason", "question", "feeling", "weather",
    "evening", "answer", "problem", "morning", "story", "window", "journey",
    "holiday", "kitchen", "meeting", "teacher", "manager", "mirror",
    "wallet", "jacket", "summer", "winter", "corner", "garden", "basket",
)

L1_FILLERS = (
    "kya", "hai", "nahi", "bahut", "acha", "aaj", "kal", "din", "raat",
    "ghar", "dost", "khana", "paani", "samay", "baat", "log", "desh",
    "shehar", "gaana", "khel", "kitab", "raasta", "kaam", "pyaar",
    "zindagi", "mausam", "subah", "shaam", "hafta", "mahina", "saal",
    "baarish", "hawa", "chai", "sapna", "yaad", "umar", "duniya", "safar",
    "mela",
)

L2_FILLERS = (
    "the", "and", "is", "are", "was", "very", "good", "nice", "today",
    "really", "just", "going", "have", "with", "this", "that", "what",
    "when", "where", "about", "happy", "great", "time", "watch", "signal",
    "playing", "super", "video", "live", "score",
)

NE_POOL = ("@rahul", "@priya", "@vikram", "Mumbai", "Delhi", "Chennai")

_L1 = LanguageTag.L1
_L2 = LanguageTag.L2


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    users: int = 72
    borrowed_words: int = 30
    mixed_words: int = 27
    usage_scale: int = 40  # planted usages added on top of usage_floor
    usage_floor: int = 2
    background_tweets: int = 200
    dirty_records: int = 6  # malformed/filtered lines appended for ingest

    def __post_init__(self) -> None:
        if self.borrowed_words + self.mixed_words < 2:
            raise ValueError("need at least two planted words")
        if self.usage_floor < 1 or self.usage_scale < 1:
            raise ValueError("usage_floor and usage_scale must be >= 1")
        peak = self.usage_floor + self.usage_scale
        if self.users < peak or self.users // 3 < max(2, (peak + 1) // 2):
            raise ValueError(
                "too few users for distinct-user planting; need "
                f"users >= {peak} and users//3 >= {max(2, (peak + 1) // 2)}"
            )


@dataclass
class SynthOutput:
    config: SynthConfig
    tweets: list[TaggedTweet]
    dirty_lines: list[str]
    truth: list[tuple[str, float]]  # (word, planted borrowedness), descending
    translation_map: dict[str, tuple[str, str]]
    frequencies: dict[str, int]
    stopwords: tuple[str, ...]
    survey_items: list[tuple[str, str, str]]  # (word, foreign, native)
    planted_borrowed: tuple[str, ...] = ()
    planted_mixed: tuple[str, ...] = ()


def _word_list(pool: tuple[str, ...], count: int, prefix: str) -> list[str]:
    words = list(pool[:count])
    words += [f"{prefix}{i}" for i in range(len(words), count)]
    return words


def _l1(rng: random.Random, n: int) -> list[Token]:
    return [Token(rng.choice(L1_FILLERS), _L1) for _ in range(n)]


def _l2(rng: random.Random, n: int) -> list[Token]:
    return [Token(rng.choice(L2_FILLERS), _L2) for _ in range(n)]


def _runs_to_spans(tags: list[LanguageTag]) -> list[PhraseSpan]:
    spans = []
    start = 0
    while start < len(tags):
        end = start + 1
        while end < len(tags) and tags[end] is tags[start]:
            end += 1
        if tags[start] is _L1:
            spans.append(PhraseSpan(start, end, PhraseTag.L1))
        elif tags[start] is _L2:
            spans.append(PhraseSpan(start, end, PhraseTag.L2))
        start = end
    return spans


def _spans(tokens: list[Token], native_word: str | None = None) -> list[PhraseSpan]:
    """Phrase spans from tag runs; a native-usage target word is absorbed
    into the surrounding L1 phrase, the way a phrase tagger would."""
    tags = [
        _L1 if native_word is not None and t.text == native_word else t.tag
        for t in tokens
    ]
    return _runs_to_spans(tags)


def _mono_l1_tweet(rng, word) -> tuple[list[Token], list[PhraseSpan]]:
    tokens = _l1(rng, 11)
    tokens.insert(rng.randrange(len(tokens) + 1), Token(word, _L2))
    return tokens, _spans(tokens, native_word=word)


def _mono_l2_tweet(rng, word) -> tuple[list[Token], list[PhraseSpan]]:
    tokens = _l2(rng, 11)
    tokens.insert(rng.randrange(len(tokens) + 1), Token(word, _L2))
    return tokens, _spans(tokens)


def _cm_l1_tweet(rng, word, level) -> tuple[list[Token], list[PhraseSpan]]:
    """Majority-native code-mixed tweet; neighbor layout tracks the level."""
    w = [Token(word, _L2)]
    r = rng.random()
    if r < 0.45 + 0.35 * level:  # between natives: HH
        tokens = _l1(rng, 2) + w + _l1(rng, 2) + _l2(rng, 1) + _l1(rng, 3)
    elif r < 0.6 + 0.35 * level:  # at a boundary: $H or H$
        if rng.random() < 0.5:
            tokens = w + _l1(rng, 2) + _l2(rng, 1) + _l1(rng, 4)
        else:
            tokens = _l1(rng, 4) + _l2(rng, 1) + _l1(rng, 2) + w
    else:  # next to a foreign filler: EH or HE
        if rng.random() < 0.5:
            tokens = _l1(rng, 3) + _l2(rng, 1) + w + _l1(rng, 3)
        else:
            tokens = _l1(rng, 3) + w + _l2(rng, 1) + _l1(rng, 3)
    return tokens, _spans(tokens, native_word=word)


def _cm_l2_tweet(rng, word, level) -> tuple[list[Token], list[PhraseSpan]]:
    """Majority-foreign code-mixed tweet; foreign neighbors dominate for
    low-level (mixing-like) words."""
    w = [Token(word, _L2)]
    q = rng.random()
    if q < 0.45 + 0.35 * (1 - level):  # EE
        tokens = _l1(rng, 1) + _l2(rng, 1) + w + _l2(rng, 1) + _l1(rng, 1) + _l2(rng, 1)
    elif q < 0.6 + 0.35 * (1 - level):  # $E or E$
        if rng.random() < 0.5:
            tokens = w + _l2(rng, 1) + _l1(rng, 1) + _l2(rng, 2) + _l1(rng, 1)
        else:
            tokens = _l1(rng, 1) + _l2(rng, 2) + _l1(rng, 1) + _l2(rng, 1) + w
    else:  # HH inside a foreign tweet
        tokens = _l2(rng, 1) + _l1(rng, 1) + w + _l1(rng, 1) + _l2(rng, 2)
    return tokens, _spans(tokens)


def _background_tweet(rng, kind: int) -> tuple[list[Token], list[PhraseSpan]]:
    kind %= 5
    if kind == 0:  # monolingual native
        tokens = _l1(rng, 12)
        return tokens, _spans(tokens)
    if kind == 1:  # monolingual foreign
        tokens = _l2(rng, 12)
        return tokens, _spans(tokens)
    if kind == 2:  # single switch
        tokens = _l1(rng, 5) + _l2(rng, 5)
        return tokens, _spans(tokens)
    if kind == 3:  # near-equal interleaved mix
        tokens = []
        for i in range(8):
            tokens += _l1(rng, 1) if i % 2 == 0 else _l2(rng, 1)
        return tokens, _spans(tokens)
    # native tweet with a named entity; no spans, exercises the derived
    # phrase fallback downstream
    tokens = _l1(rng, 10)
    tokens.insert(rng.randrange(len(tokens) + 1), Token(rng.choice(NE_POOL), LanguageTag.NE))
    return tokens, []


def generate(cfg: SynthConfig) -> SynthOutput:
    rng = random.Random(f"synth:{cfg.seed}")
    borrowed = _word_list(BORROWED_POOL, cfg.borrowed_words, "loanword")
    mixed = _word_list(MIXED_POOL, cfg.mixed_words, "mixword")
    planted = borrowed + mixed
    n = len(planted)
    users = [f"u{i:03d}" for i in range(cfg.users)]
    third = cfg.users // 3
    high_pool = users[:third]  # author the CM_L1 tweets
    mid_pool = users[third : 2 * third]  # author the CM_L2 / CM_EQ tweets
    mono_pool = users[2 * third :] + mid_pool  # extra monolingual background

    # (user, tokens, spans) triples, shuffled before ids are assigned
    drafts: list[tuple[str, list[Token], list[PhraseSpan]]] = []
    truth: list[tuple[str, float]] = []
    for i, word in enumerate(planted):
        level = 1 - i / (n - 1)
        truth.append((word, round(level, 6)))
        native_usages = cfg.usage_floor + round(level * cfg.usage_scale)
        foreign_usages = cfg.usage_floor + round((1 - level) * cfg.usage_scale)
        for j in range(native_usages):
            if j % 2 == 0:
                user = users[(i * 17 + j // 2) % cfg.users]
                tweet = lambda: _mono_l1_tweet(rng, word)
            else:
                user = high_pool[(i * 19 + j // 2) % len(high_pool)]
                tweet = lambda: _cm_l1_tweet(rng, word, level)
            drafts.append((user, *tweet()))
            if j == 0 and i % 3 == 0:  # same user tweets the word twice
                drafts.append((user, *tweet()))
        for j in range(foreign_usages):
            user = users[(i * 23 + 7 + j) % cfg.users]
            drafts.append((user, *_mono_l2_tweet(rng, word)))
            if j == 0 and i % 3 == 0:
                drafts.append((user, *_mono_l2_tweet(rng, word)))
        for j in range(2):  # keep every planted word a code-mixed candidate
            user = mid_pool[(i * 29 + j) % len(mid_pool)]
            drafts.append((user, *_cm_l2_tweet(rng, word, level)))
    for j in range(cfg.background_tweets):
        kind = j % 5
        if kind == 3:
            user = mid_pool[(j * 7 + 3) % len(mid_pool)]
        elif kind == 2:
            user = users[(j * 13 + 5) % cfg.users]
        else:
            user = mono_pool[(j * 11 + 1) % len(mono_pool)]
        drafts.append((user, *_background_tweet(rng, kind)))
    rng.shuffle(drafts)
    tweets = [
        TaggedTweet(
            id=f"t{idx:06d}",
            user_id=user,
            tokens=tuple(tokens),
            phrases=tuple(spans),
            timestamp=1_600_000_000 + idx,
        )
        for idx, (user, tokens, spans) in enumerate(drafts)
    ]

    dirty = _dirty_lines(cfg, tweets)

    freq_rng = random.Random(f"synth:{cfg.seed}:freqs")
    translation_map: dict[str, tuple[str, str]] = {}
    frequencies: dict[str, int] = {}
    survey_items: list[tuple[str, str, str]] = []
    for i, word in enumerate(planted):
        translation = f"{L1_FILLERS[i % len(L1_FILLERS)]}{i}"
        translation_map[word] = (word, translation)
        frequencies[word] = freq_rng.randint(1, 999)
        frequencies[translation] = freq_rng.randint(1, 999)
        foreign = f"kya aapko {word} bahut pasand hai"
        survey_items.append((word, foreign, foreign.replace(word, translation)))

    return SynthOutput(
        config=cfg,
        tweets=tweets,
        dirty_lines=dirty,
        truth=truth,
        translation_map=translation_map,
        frequencies=frequencies,
        stopwords=tuple(sorted(L2_FILLERS)),
        survey_items=survey_items,
        planted_borrowed=tuple(borrowed),
        planted_mixed=tuple(mixed),
    )


def _dirty_lines(cfg: SynthConfig, tweets: list[TaggedTweet]) -> list[str]:
    """Records the ingest filters must reject, cycled up to dirty_records."""
    if cfg.dirty_records <= 0 or not tweets:
        return []
    templates = [
        json.dumps(
            {
                "id": "dirty-url",
                "user": "u000",
                "tokens": [
                    {"t": "http://t.co/xyz", "g": "OTHER"},
                    {"t": "@spam", "g": "NE"},
                ],
            }
        ),
        json.dumps(
            {
                "id": "dirty-script",
                "user": "u001",
                "tokens": [
                    {"t": "yeh", "g": "L1"},
                    {"t": "किताब", "g": "L1"},
                ],
            }
        ),
        json.dumps(tweet_to_record(tweets[0])),  # duplicate id
        '{"id": "dirty-broken", "user": "u002"',  # malformed line
        json.dumps({"id": "dirty-empty", "user": "u003", "tokens": []}),
        json.dumps(
            {
                "id": "dirty-mention",
                "user": "u004",
                "tokens": [{"t": "@only", "g": "NE"}],
            }
        ),
    ]
    return [templates[i % len(templates)] for i in range(cfg.dirty_records)]


@dataclass(frozen=True)
class SynthPaths:
    corpus: Path
    truth: Path
    translation_map: Path
    frequencies: Path
    stopwords: Path
    survey_items: Path
    manifest: Path


def write_output(out: SynthOutput, directory: str | Path) -> SynthPaths:
    """Write every artifact the downstream pipeline consumes. Deterministic:
    the same config yields byte-identical files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = SynthPaths(
        corpus=directory / "corpus.jsonl",
        truth=directory / "truth.tsv",
        translation_map=directory / "translation_map.tsv",
        frequencies=directory / "ref_freqs.tsv",
        stopwords=directory / "stopwords.txt",
        survey_items=directory / "survey_items.tsv",
        manifest=directory / "synth_manifest.json",
    )
    with open(paths.corpus, "w", encoding="utf-8") as fh:
        for tweet in out.tweets:
            fh.write(json.dumps(tweet_to_record(tweet), ensure_ascii=False) + "\n")
        for line in out.dirty_lines:
            fh.write(line + "\n")
    with open(paths.truth, "w", encoding="utf-8") as fh:
        for word, score in out.truth:
            fh.write(f"{word}\t{score:.6f}\n")
    with open(paths.translation_map, "w", encoding="utf-8") as fh:
        for word, (translit, translation) in out.translation_map.items():
            fh.write(f"{word}\t{translit}\t{translation}\n")
    with open(paths.frequencies, "w", encoding="utf-8") as fh:
        for token, count in out.frequencies.items():
            fh.write(f"{token}\t{count}\n")
    with open(paths.stopwords, "w", encoding="utf-8") as fh:
        fh.writelines(f"{w}\n" for w in out.stopwords)
    with open(paths.survey_items, "w", encoding="utf-8") as fh:
        for word, foreign, native in out.survey_items:
            fh.write(f"{word}\t{foreign}\t{native}\n")
    manifest = {
        "config": {
            "seed": out.config.seed,
            "users": out.config.users,
            "borrowed_words": out.config.borrowed_words,
            "mixed_words": out.config.mixed_words,
            "usage_scale": out.config.usage_scale,
            "usage_floor": out.config.usage_floor,
            "background_tweets": out.config.background_tweets,
            "dirty_records": out.config.dirty_records,
        },
        "tweets": len(out.tweets),
        "planted_borrowed": list(out.planted_borrowed),
        "planted_mixed": list(out.planted_mixed),
    }
    with open(paths.manifest, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
