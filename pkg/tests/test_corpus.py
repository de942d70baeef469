import json

import pytest

from borrowsig.corpus import (
    DEFAULT_ROMANIZED_CODEPOINTS,
    IngestReport,
    LanguageTag,
    PhraseSpan,
    PhraseTag,
    TaggedTweet,
    Token,
    ingest,
    lexicon_tag,
    load_lexicon,
    tweet_to_record,
)


def line(**kwargs):
    record = {"id": "t1", "user": "u1", "tokens": [{"t": "hello", "g": "L2"}]}
    record.update(kwargs)
    return json.dumps(record)


class TestIngest:
    def test_clean_record_kept(self):
        tweets, report = ingest([line()])
        assert len(tweets) == 1
        assert tweets[0].tokens[0] == Token("hello", LanguageTag.L2)
        assert report.kept == 1 and report.total == 1

    def test_url_only_dropped(self):
        tweets, report = ingest([line(tokens=[{"t": "http://x.co", "g": "OTHER"}])])
        assert not tweets
        assert report.dropped == {"url_only": 1}

    def test_mention_and_url_mix_dropped(self):
        record = line(tokens=[{"t": "@you", "g": "NE"}, {"t": "www.x.co", "g": "OTHER"}])
        _, report = ingest([record])
        assert report.dropped == {"url_only": 1}

    def test_devanagari_codepoint_dropped(self):
        # U+0915 sits outside Basic Latin + Latin-1 + General Punctuation
        assert ord("क") not in DEFAULT_ROMANIZED_CODEPOINTS
        _, report = ingest([line(tokens=[{"t": "कitab", "g": "L1"}])])
        assert report.dropped == {"non_romanized": 1}

    def test_curly_quote_allowed(self):
        tweets, _ = ingest([line(tokens=[{"t": "don’t", "g": "L2"}])])
        assert len(tweets) == 1

    def test_custom_codepoint_set(self):
        allowed = DEFAULT_ROMANIZED_CODEPOINTS | frozenset([0x0915])
        tweets, _ = ingest([line(tokens=[{"t": "कitab", "g": "L1"}])], allowed)
        assert len(tweets) == 1

    def test_empty_tokens_dropped(self):
        _, report = ingest([line(tokens=[])])
        assert report.dropped == {"empty": 1}

    def test_malformed_line_collected_not_fatal(self):
        tweets, report = ingest(['{"id": ', line(id="t2")])
        assert [t.id for t in tweets] == ["t2"]
        assert report.dropped == {"malformed": 1}
        assert len(report.errors) == 1 and "line 1" in report.errors[0]

    def test_duplicate_id_first_kept(self):
        first = line(tokens=[{"t": "first", "g": "L2"}])
        second = line(tokens=[{"t": "second", "g": "L2"}])
        tweets, report = ingest([first, second])
        assert [t.tokens[0].text for t in tweets] == ["first"]
        assert report.dropped == {"duplicate_id": 1}

    def test_duplicate_of_dropped_record_still_duplicate(self):
        dropped = line(tokens=[{"t": "http://x.co", "g": "OTHER"}])
        retry = line(tokens=[{"t": "fine", "g": "L2"}])
        tweets, report = ingest([dropped, retry])
        assert not tweets
        assert report.dropped == {"url_only": 1, "duplicate_id": 1}

    def test_counts_balance_and_determinism(self):
        lines = [
            line(),
            line(id="t2", tokens=[{"t": "http://x.co", "g": "OTHER"}]),
            "not json",
            line(id="t3", tokens=[]),
            line(id="t4", tokens=[{"t": "क", "g": "L1"}]),
            line(),
            "",
        ]
        tweets1, report1 = ingest(lines)
        tweets2, report2 = ingest(lines)
        assert report1.total == 6  # blank line skipped
        assert report1.kept + sum(report1.dropped.values()) == report1.total
        assert tweets1 == tweets2 and report1.as_dict() == report2.as_dict()

    def test_kept_tweets_satisfy_filters(self):
        lines = [line(id=f"t{i}", tokens=[{"t": f"w{i}", "g": "L2"}]) for i in range(20)]
        lines += [line(id="bad", tokens=[{"t": "@a", "g": "NE"}])]
        tweets, _ = ingest(lines)
        for t in tweets:
            assert t.tokens
            assert not all(tok.text.startswith("@") or "://" in tok.text for tok in t.tokens)
            assert all(
                ord(c) in DEFAULT_ROMANIZED_CODEPOINTS for tok in t.tokens for c in tok.text
            )

    def test_phrases_parsed_and_validated(self):
        good = line(phrases=[{"s": 0, "e": 1, "g": "L2"}])
        tweets, _ = ingest([good])
        assert tweets[0].phrases == (PhraseSpan(0, 1, PhraseTag.L2),)
        overlapping = line(
            id="t9",
            tokens=[{"t": "a", "g": "L1"}, {"t": "b", "g": "L1"}],
            phrases=[{"s": 0, "e": 2, "g": "L1"}, {"s": 1, "e": 2, "g": "L1"}],
        )
        _, report = ingest([overlapping])
        assert report.dropped == {"malformed": 1}


class TestTypes:
    def test_token_rejects_whitespace(self):
        with pytest.raises(ValueError):
            Token("two words", LanguageTag.L1)
        with pytest.raises(ValueError):
            Token("", LanguageTag.L1)

    def test_span_bounds(self):
        with pytest.raises(ValueError):
            PhraseSpan(2, 2, PhraseTag.L1)
        with pytest.raises(ValueError):
            TaggedTweet(
                id="x",
                user_id="u",
                tokens=(Token("a", LanguageTag.L1),),
                phrases=(PhraseSpan(0, 5, PhraseTag.L1),),
            )

    def test_tweet_needs_tokens(self):
        with pytest.raises(ValueError):
            TaggedTweet(id="x", user_id="u", tokens=())

    def test_round_trip_record(self):
        tweets, _ = ingest([line(ts=123, phrases=[{"s": 0, "e": 1, "g": "L2"}])])
        assert json.loads(json.dumps(tweet_to_record(tweets[0]))) == {
            "id": "t1",
            "user": "u1",
            "ts": 123,
            "tokens": [{"t": "hello", "g": "L2"}],
            "phrases": [{"s": 0, "e": 1, "g": "L2"}],
        }


class TestLexiconTag:
    LEX = {"film": LanguageTag.L2, "kya": LanguageTag.L1}

    def test_lookup(self):
        assert lexicon_tag(["film"], self.LEX) == [Token("film", LanguageTag.L2)]
        assert lexicon_tag(["FILM"], self.LEX) == [Token("FILM", LanguageTag.L2)]

    def test_mention_is_ne(self):
        assert lexicon_tag(["@user"], self.LEX) == [Token("@user", LanguageTag.NE)]

    def test_hashtag_and_url_are_other(self):
        tagged = lexicon_tag(["#tag", "http://x.co/y"], self.LEX)
        assert [t.tag for t in tagged] == [LanguageTag.OTHER, LanguageTag.OTHER]

    def test_unknown_is_other(self):
        assert lexicon_tag(["xyzzy"], self.LEX)[0].tag is LanguageTag.OTHER

    def test_empty_lexicon_rejected(self):
        with pytest.raises(ValueError):
            lexicon_tag(["a"], {})

    def test_load_lexicon(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("# comment\nfilm\tL2\nkya\tL1\n", encoding="utf-8")
        assert load_lexicon(path) == self.LEX


def test_report_as_dict_sorted():
    report = IngestReport(total=3, kept=1, dropped={"url_only": 1, "empty": 1})
    assert list(report.as_dict()["dropped"]) == ["empty", "url_only"]
