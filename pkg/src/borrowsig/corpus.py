"""Corpus data model, line-delimited JSON ingestion, and a lexicon fallback tagger.

A corpus file carries one tweet per line:

    {"id": str, "user": str, "ts": int?,
     "tokens": [{"t": str, "g": "L1"|"L2"|"NE"|"OTHER"}],
     "phrases": [{"s": int, "e": int, "g": "L1"|"L2"|"OTHER"}]?}

Ingestion keeps only tweets that pass the cleanliness filters (non-empty,
not URL/mention-only, written entirely in the allowed codepoint set) and
reports per-reason drop counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping


class LanguageTag(Enum):
    """Word-level tag: native (L1), foreign (L2), named entity, or other."""

    L1 = "L1"
    L2 = "L2"
    NE = "NE"
    OTHER = "OTHER"


class PhraseTag(Enum):
    """Phrase-level tag; named entities fold into OTHER at phrase level."""

    L1 = "L1"
    L2 = "L2"
    OTHER = "OTHER"


@dataclass(frozen=True)
class Token:
    text: str
    tag: LanguageTag

    def __post_init__(self) -> None:
        if not self.text or any(c.isspace() for c in self.text):
            raise ValueError(f"token text must be non-empty and whitespace-free: {self.text!r}")


@dataclass(frozen=True)
class PhraseSpan:
    """Half-open token-index range [start, end) with a phrase-level tag."""

    start: int
    end: int
    tag: PhraseTag

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid phrase span [{self.start}, {self.end})")


@dataclass(frozen=True)
class TaggedTweet:
    id: str
    user_id: str
    tokens: tuple[Token, ...]
    phrases: tuple[PhraseSpan, ...] = ()
    timestamp: int | None = None

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError(f"tweet {self.id!r} has no tokens")
        last_end = 0
        for span in sorted(self.phrases, key=lambda s: s.start):
            if span.start < last_end:
                raise ValueError(f"tweet {self.id!r} has overlapping phrase spans")
            if span.end > len(self.tokens):
                raise ValueError(f"tweet {self.id!r} phrase span exceeds token count")
            last_end = span.end


# Lexicon: lowercase token text -> tag. Plumbing stand-in for a real
# word-level language identifier; only used by demos and the CLI.
Lexicon = Mapping[str, LanguageTag]


def _codepoints(lo: int, hi: int) -> frozenset[int]:
    return frozenset(range(lo, hi + 1))


# "Romanized" filter default: Basic Latin + Latin-1 supplement (covers ASCII
# digits and punctuation) plus the General Punctuation block for curly
# quotes/dashes common in tweets.
DEFAULT_ROMANIZED_CODEPOINTS: frozenset[int] = (
    _codepoints(0x0000, 0x00FF) | _codepoints(0x2000, 0x206F)
)

DROP_MALFORMED = "malformed"
DROP_DUPLICATE_ID = "duplicate_id"
DROP_EMPTY = "empty"
DROP_URL_ONLY = "url_only"
DROP_NON_ROMANIZED = "non_romanized"


@dataclass
class IngestReport:
    total: int = 0
    kept: int = 0
    dropped: dict[str, int] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    def drop(self, reason: str) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": self.kept,
            "dropped": dict(sorted(self.dropped.items())),
            "errors": list(self.errors),
        }


def _is_url(text: str) -> bool:
    return "://" in text or text.lower().startswith("www.")


def _is_mention(text: str) -> bool:
    return text.startswith("@")


class _EmptyRecord(Exception):
    """Well-formed record with an empty token list."""


def _parse_record(obj: object) -> TaggedTweet:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    try:
        tweet_id = obj["id"]
        user = obj["user"]
        raw_tokens = obj["tokens"]
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(tweet_id, str) or not isinstance(user, str):
        raise ValueError("id and user must be strings")
    if not isinstance(raw_tokens, list):
        raise ValueError("tokens must be a list")
    ts = obj.get("ts")
    if ts is not None and not isinstance(ts, int):
        raise ValueError("ts must be an integer when present")
    if not raw_tokens:
        raise _EmptyRecord(tweet_id)
    tokens = []
    for raw in raw_tokens:
        if not isinstance(raw, dict) or "t" not in raw or "g" not in raw:
            raise ValueError("token entries need 't' and 'g'")
        try:
            tag = LanguageTag(raw["g"])
        except ValueError:
            raise ValueError(f"unknown language tag {raw['g']!r}") from None
        tokens.append(Token(str(raw["t"]), tag))
    phrases = []
    for raw in obj.get("phrases") or []:
        if not isinstance(raw, dict) or not {"s", "e", "g"} <= raw.keys():
            raise ValueError("phrase entries need 's', 'e' and 'g'")
        try:
            ptag = PhraseTag(raw["g"])
        except ValueError:
            raise ValueError(f"unknown phrase tag {raw['g']!r}") from None
        phrases.append(PhraseSpan(int(raw["s"]), int(raw["e"]), ptag))
    return TaggedTweet(
        id=tweet_id,
        user_id=user,
        tokens=tuple(tokens),
        phrases=tuple(phrases),
        timestamp=ts,
    )


def ingest(
    lines: Iterable[str],
    allowed_codepoints: frozenset[int] = DEFAULT_ROMANIZED_CODEPOINTS,
) -> tuple[list[TaggedTweet], IngestReport]:
    """Parse and filter a line-delimited corpus stream.

    Deterministic: output order is input order; a malformed line is recorded
    in the report and never aborts the stream. An id is claimed by the first
    record that parses with it, so later records reusing the id are dropped
    as duplicates even when that first record was itself filtered out.
    """
    report = IngestReport()
    kept: list[TaggedTweet] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        report.total += 1
        try:
            tweet = _parse_record(json.loads(line))
        except _EmptyRecord as exc:
            tweet_id = exc.args[0]
            if tweet_id in seen_ids:
                report.drop(DROP_DUPLICATE_ID)
            else:
                seen_ids.add(tweet_id)
                report.drop(DROP_EMPTY)
            continue
        except (json.JSONDecodeError, ValueError) as exc:
            report.drop(DROP_MALFORMED)
            report.errors.append(f"line {lineno}: {exc}")
            continue
        if tweet.id in seen_ids:
            report.drop(DROP_DUPLICATE_ID)
            continue
        seen_ids.add(tweet.id)
        if all(_is_url(t.text) or _is_mention(t.text) for t in tweet.tokens):
            report.drop(DROP_URL_ONLY)
            continue
        if any(ord(c) not in allowed_codepoints for t in tweet.tokens for c in t.text):
            report.drop(DROP_NON_ROMANIZED)
            continue
        kept.append(tweet)
        report.kept += 1
    return kept, report


def read_corpus(
    path: str | Path,
    allowed_codepoints: frozenset[int] = DEFAULT_ROMANIZED_CODEPOINTS,
) -> tuple[list[TaggedTweet], IngestReport]:
    with open(path, encoding="utf-8") as fh:
        return ingest(fh, allowed_codepoints)


def tweet_to_record(tweet: TaggedTweet) -> dict:
    record: dict = {"id": tweet.id, "user": tweet.user_id}
    if tweet.timestamp is not None:
        record["ts"] = tweet.timestamp
    record["tokens"] = [{"t": t.text, "g": t.tag.value} for t in tweet.tokens]
    if tweet.phrases:
        record["phrases"] = [
            {"s": s.start, "e": s.end, "g": s.tag.value} for s in tweet.phrases
        ]
    return record


def write_corpus(path: str | Path, tweets: Iterable[TaggedTweet]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tweet in tweets:
            fh.write(json.dumps(tweet_to_record(tweet), ensure_ascii=False) + "\n")


def lexicon_tag(texts: Iterable[str], lexicon: Lexicon) -> list[Token]:
    """Tag raw token strings by lexicon lookup.

    Mentions become NE; hashtags and URLs become OTHER; anything the lexicon
    does not know becomes OTHER. Total over valid token strings.
    """
    if not lexicon:
        raise ValueError("lexicon must be non-empty")
    tokens = []
    for text in texts:
        if text.startswith("@"):
            tag = LanguageTag.NE
        elif text.startswith("#") or "://" in text:
            tag = LanguageTag.OTHER
        else:
            tag = lexicon.get(text.lower(), LanguageTag.OTHER)
        tokens.append(Token(text, tag))
    return tokens


def load_lexicon(path: str | Path) -> dict[str, LanguageTag]:
    """Read a TSV lexicon (token<TAB>TAG, '#' comments allowed)."""
    lexicon: dict[str, LanguageTag] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected token<TAB>TAG")
            token, tag = parts
            lexicon[token.lower()] = LanguageTag(tag)
    return lexicon


def iter_token_texts(tweet: TaggedTweet) -> Iterator[str]:
    for token in tweet.tokens:
        yield token.text.lower()
