import pytest

from borrowsig.corpus import LanguageTag, PhraseSpan, PhraseTag, TaggedTweet, Token

TAGS = {
    "h": LanguageTag.L1,
    "e": LanguageTag.L2,
    "n": LanguageTag.NE,
    "o": LanguageTag.OTHER,
}


def tok(text: str, tag: str = "e") -> Token:
    return Token(text, TAGS[tag])


def tweet(tweet_id, user, spec, phrases=()):
    """Compact tweet builder: spec is a list of 'text:tagchar' strings
    (tag char h/e/n/o, default e) or (text, tagchar) pairs."""
    tokens = []
    for entry in spec:
        if isinstance(entry, tuple):
            text, tag = entry
        elif ":" in entry:
            text, _, tag = entry.rpartition(":")
        else:
            text, tag = entry, "e"
        tokens.append(tok(text, tag))
    spans = tuple(
        PhraseSpan(s, e, PhraseTag(g)) for s, e, g in phrases
    )
    return TaggedTweet(id=str(tweet_id), user_id=user, tokens=tuple(tokens), phrases=spans)


@pytest.fixture
def small_corpus():
    """Three tweets: monolingual native, monolingual foreign, single switch."""
    return [
        tweet("t1", "u1", ["kya:h", "baat:h", "hai:h"]),
        tweet("t2", "u2", ["good:e", "morning:e", "all:e"]),
        tweet("t3", "u3", ["kya:h", "baat:h", "hai:h", "good:e", "morning:e", "all:e"]),
    ]
