import json

import pytest

from borrowsig import synth
from borrowsig.classify import TweetClass, classify_corpus, user_mix_buckets
from borrowsig.corpus import ingest, tweet_to_record


SMALL = dict(users=40, borrowed_words=8, mixed_words=7, usage_scale=12,
             usage_floor=1, background_tweets=60)


def corpus_lines(out):
    return [json.dumps(tweet_to_record(t)) for t in out.tweets] + out.dirty_lines


def test_deterministic_for_seed(tmp_path):
    a = synth.generate(synth.SynthConfig(seed=7, **SMALL))
    b = synth.generate(synth.SynthConfig(seed=7, **SMALL))
    assert corpus_lines(a) == corpus_lines(b)
    assert a.truth == b.truth and a.frequencies == b.frequencies
    pa = synth.write_output(a, tmp_path / "one")
    pb = synth.write_output(b, tmp_path / "two")
    assert pa.corpus.read_bytes() == pb.corpus.read_bytes()
    assert pa.manifest.read_bytes() == pb.manifest.read_bytes()


def test_different_seeds_differ():
    a = synth.generate(synth.SynthConfig(seed=1, **SMALL))
    b = synth.generate(synth.SynthConfig(seed=2, **SMALL))
    assert corpus_lines(a) != corpus_lines(b)


def test_small_config_stays_desk_scale():
    out = synth.generate(synth.SynthConfig(seed=3, **SMALL))
    assert len(out.tweets) <= 500
    assert len({t.user_id for t in out.tweets}) <= 40


def test_planted_tweets_classify_as_designed():
    out = synth.generate(synth.SynthConfig(seed=5, **SMALL))
    result = classify_corpus(out.tweets)
    assert not result.unclassifiable
    histogram = result.histogram
    for cls in (TweetClass.MONO_L1, TweetClass.MONO_L2, TweetClass.CM_L1,
                TweetClass.CM_L2, TweetClass.CM_EQ, TweetClass.CS):
        assert histogram[cls] > 0, cls


def test_every_planted_word_is_a_code_mixed_candidate():
    out = synth.generate(synth.SynthConfig(seed=11, **SMALL))
    result = classify_corpus(out.tweets)
    planted = {w for w, _ in out.truth}
    seen = set()
    for t in out.tweets:
        if result.classes[t.id] in (TweetClass.CM_L1, TweetClass.CM_L2, TweetClass.CM_EQ):
            for token in t.tokens:
                if token.tag.value == "L2":
                    seen.add(token.text.lower())
    assert planted <= seen


def test_truth_is_strictly_decreasing():
    out = synth.generate(synth.SynthConfig(seed=2, **SMALL))
    levels = [s for _, s in out.truth]
    assert levels == sorted(levels, reverse=True)
    assert len(set(levels)) == len(levels)


def test_mixing_buckets_all_populated():
    out = synth.generate(synth.SynthConfig(seed=7))
    result = classify_corpus(out.tweets)
    buckets = user_mix_buckets(out.tweets, result.classes)
    assert all(len(users) > 0 for users in buckets.values())


def test_dirty_lines_dropped_by_ingest():
    out = synth.generate(synth.SynthConfig(seed=9, **SMALL, dirty_records=6))
    tweets, report = ingest(corpus_lines(out))
    assert report.kept == len(out.tweets)
    assert set(report.dropped) == {
        "url_only", "non_romanized", "duplicate_id", "malformed", "empty",
    }
    assert [t.id for t in tweets] == [t.id for t in out.tweets]


def test_survey_items_contain_their_word():
    out = synth.generate(synth.SynthConfig(seed=4, **SMALL))
    assert len(out.survey_items) == 15
    for word, foreign, native in out.survey_items:
        assert word in foreign.split()
        assert word not in native.split()


def test_translation_map_covers_truth():
    out = synth.generate(synth.SynthConfig(seed=4, **SMALL))
    for word, _ in out.truth:
        translit, translation = out.translation_map[word]
        assert translit in out.frequencies and translation in out.frequencies


def test_config_validation():
    with pytest.raises(ValueError):
        synth.SynthConfig(seed=0, users=10, usage_scale=40)
    with pytest.raises(ValueError):
        synth.SynthConfig(seed=0, borrowed_words=1, mixed_words=0)
