import math
import random

import pytest

from borrowsig.classify import classify_corpus
from borrowsig.metrics import (
    BaselineInputs,
    MissingMapping,
    WordUsageCounts,
    baseline_score,
    build_baseline_inputs,
    cohort_counts,
    derive_phrases,
    load_frequency_table,
    load_translation_map,
    upr,
    usage_counts,
    utr,
    uur,
)
from borrowsig.corpus import PhraseSpan, PhraseTag
from borrowsig import synth

from conftest import tweet
from oracles import ratio, recount_usage


def classes_of(corpus):
    return classify_corpus(corpus).classes


class TestUsageCounts:
    def test_single_native_tweet(self):
        corpus = [tweet("t1", "u1", ["kya:h", "film:e", *["x:h"] * 9])]
        c = usage_counts("film", corpus, classes_of(corpus))
        assert (c.u_l1, c.t_l1) == (1, 1)
        assert c.u_cml1 == c.u_l2 == c.t_cml1 == c.t_l2 == 0

    def test_unique_user_vs_tweet(self):
        corpus = [
            tweet(f"t{i}", "same", ["film:e", *["w:e"] * 10]) for i in range(3)
        ]
        c = usage_counts("film", corpus, classes_of(corpus))
        assert (c.u_l2, c.t_l2) == (1, 3)

    def test_case_insensitive_containment(self):
        corpus = [tweet("t1", "u1", ["FILM:e", *["w:e"] * 10])]
        c = usage_counts("film", corpus, classes_of(corpus))
        assert c.t_l2 == 1

    def test_cm_l2_tweets_feed_no_column(self):
        corpus = [tweet("t1", "u1", ["film:e", "a:e", "b:e", "kya:h", "c:e", "na:h"])]
        assert classes_of(corpus)["t1"].value == "CM_L2"
        c = usage_counts("film", corpus, classes_of(corpus))
        assert (c.u_l1, c.u_cml1, c.u_l2, c.t_l1, c.t_cml1, c.t_l2) == (0,) * 6

    def test_explicit_phrases_used(self):
        corpus = [
            tweet(
                "t1",
                "u1",
                ["kya:h", "film:e", "hai:h"],
                phrases=[(0, 3, "L1")],
            )
        ]
        c = usage_counts("film", corpus, classes_of(corpus))
        assert (c.p_l1, c.p_l2) == (1, 0)

    def test_derived_phrases_fallback(self):
        corpus = [tweet("t1", "u1", ["kya:h", "na:h", "film:e", "good:e", "@x:n"])]
        c = usage_counts("film", corpus, classes_of(corpus))
        # runs: [kya na]=L1, [film good]=L2, NE run yields nothing
        assert (c.p_l1, c.p_l2) == (0, 1)

    def test_derive_phrases_runs(self):
        t = tweet("t1", "u1", ["a:h", "b:h", "c:e", "@d:n", "e:h"])
        assert derive_phrases(t) == (
            PhraseSpan(0, 2, PhraseTag.L1),
            PhraseSpan(2, 3, PhraseTag.L2),
            PhraseSpan(4, 5, PhraseTag.L1),
        )

    def test_all_zero_allowed(self):
        corpus = [tweet("t1", "u1", ["kya:h", "hai:h"])]
        c = usage_counts("absent", corpus, classes_of(corpus))
        assert c == WordUsageCounts(word="absent")

    def test_reorder_invariance(self):
        out = synth.generate(synth.SynthConfig(seed=3, users=40, borrowed_words=5,
                                               mixed_words=5, usage_scale=12,
                                               usage_floor=1, background_tweets=40,
                                               dirty_records=0))
        classes = classes_of(out.tweets)
        shuffled = list(out.tweets)
        random.Random(1).shuffle(shuffled)
        for word, _ in out.truth:
            assert usage_counts(word, out.tweets, classes) == usage_counts(
                word, shuffled, classes
            )

    def test_tweet_id_relabel_invariance(self):
        out = synth.generate(synth.SynthConfig(seed=4, users=40, borrowed_words=4,
                                               mixed_words=4, usage_scale=8,
                                               usage_floor=1, background_tweets=20,
                                               dirty_records=0))
        classes = classes_of(out.tweets)
        relabeled = [
            type(t)(id=f"x-{t.id}", user_id=t.user_id, tokens=t.tokens,
                    phrases=t.phrases, timestamp=t.timestamp)
            for t in out.tweets
        ]
        relabeled_classes = {f"x-{k}": v for k, v in classes.items()}
        for word, _ in out.truth:
            assert usage_counts(word, out.tweets, classes) == usage_counts(
                word, relabeled, relabeled_classes
            )

    def test_recount_oracle_small(self):
        rng = random.Random(17)
        corpus = []
        for i in range(200):
            n = rng.randint(1, 8)
            spec = [
                (rng.choice(["film", "kya", "time", "hai", "road"]), rng.choice("heno"))
                for _ in range(n)
            ]
            corpus.append(tweet(f"t{i}", f"u{rng.randint(0, 9)}", spec))
        classes = classes_of(corpus)
        for word in ("film", "kya", "time", "road"):
            got = usage_counts(word, corpus, classes)
            want = recount_usage(word, corpus, classes)
            assert got.__dict__ == {"word": word, **want}


class TestRatios:
    def test_uur_direct(self):
        c = WordUsageCounts(word="w", u_l1=4, u_cml1=2, u_l2=3)
        assert uur(c).value == 2.0
        assert not uur(c).denominator_zero

    def test_utr_zero_numerator(self):
        c = WordUsageCounts(word="w", t_l2=5)
        assert utr(c).value == 0.0

    def test_upr_infinite(self):
        c = WordUsageCounts(word="w", p_l1=7, p_l2=0)
        score = upr(c)
        assert math.isinf(score.value) and score.denominator_zero

    def test_zero_over_zero(self):
        score = upr(WordUsageCounts(word="w"))
        assert score.value == 0.0 and score.denominator_zero

    def test_monotonicity(self):
        base = WordUsageCounts(word="w", u_l1=3, u_cml1=1, u_l2=4)
        more_num = WordUsageCounts(word="w", u_l1=4, u_cml1=1, u_l2=4)
        more_den = WordUsageCounts(word="w", u_l1=3, u_cml1=1, u_l2=5)
        assert uur(more_num).value > uur(base).value > uur(more_den).value


class TestCohortCounts:
    def build(self):
        out = synth.generate(synth.SynthConfig(seed=11, users=40, borrowed_words=5,
                                               mixed_words=5, usage_scale=12,
                                               usage_floor=1, background_tweets=40,
                                               dirty_records=0))
        return out, classes_of(out.tweets)

    def test_all_users_is_identity(self):
        out, classes = self.build()
        users = frozenset(t.user_id for t in out.tweets)
        for word, _ in out.truth[:3]:
            assert cohort_counts(word, out.tweets, classes, users) == usage_counts(
                word, out.tweets, classes
            )

    def test_empty_subset(self):
        out, classes = self.build()
        c = cohort_counts(out.truth[0][0], out.tweets, classes, frozenset())
        assert c == WordUsageCounts(word=out.truth[0][0])

    def test_random_subset_matches_restricted_recount(self):
        out, classes = self.build()
        rng = random.Random(2)
        users = sorted({t.user_id for t in out.tweets})
        subset = frozenset(rng.sample(users, len(users) // 2))
        restricted = [t for t in out.tweets if t.user_id in subset]
        for word, _ in out.truth:
            got = cohort_counts(word, out.tweets, classes, subset)
            want = recount_usage(word, restricted, classes)
            assert got.__dict__ == {"word": word, **want}

    def test_partition_additivity_for_t_and_p(self):
        out, classes = self.build()
        users = sorted({t.user_id for t in out.tweets})
        parts = [frozenset(users[0::3]), frozenset(users[1::3]), frozenset(users[2::3])]
        for word, _ in out.truth[:4]:
            total = usage_counts(word, out.tweets, classes)
            pieces = [cohort_counts(word, out.tweets, classes, p) for p in parts]
            for col in ("t_l1", "t_cml1", "t_l2", "p_l1", "p_l2"):
                assert sum(getattr(p, col) for p in pieces) == getattr(total, col)


class TestBaseline:
    def test_raw_log_ratio(self):
        score = baseline_score(
            BaselineInputs("w", "tw", "hw", f_l2=100, f_l1=10), smoothing=0
        )
        assert score.value == pytest.approx(2.302585, abs=1e-6)
        assert score.value == pytest.approx(math.log(10), abs=1e-12)

    def test_equal_frequencies_zero(self):
        score = baseline_score(BaselineInputs("w", "t", "h", f_l2=42, f_l1=42), 0)
        assert score.value == 0.0

    def test_smoothed_zero_count(self):
        score = baseline_score(BaselineInputs("w", "t", "h", f_l2=0, f_l1=50))
        assert score.value == pytest.approx(math.log(1 / 51), abs=1e-12)
        assert score.value == pytest.approx(-3.9318, abs=1e-4)
        assert score.denominator_zero

    def test_raw_mode_zero_errors(self):
        with pytest.raises(ValueError):
            baseline_score(BaselineInputs("w", "t", "h", f_l2=0, f_l1=5), smoothing=0)
        with pytest.raises(ValueError):
            baseline_score(BaselineInputs("w", "t", "h", f_l2=5, f_l1=0), smoothing=0)

    def test_log_base_rank_invariance(self):
        rng = random.Random(31)
        inputs = [
            BaselineInputs(f"w{i}", "t", "h", f_l2=rng.randint(1, 500),
                           f_l1=rng.randint(1, 500))
            for i in range(40)
        ]
        natural = [baseline_score(b, 0).value for b in inputs]
        base10 = [v / math.log(10) for v in natural]
        assert sorted(range(40), key=lambda i: natural[i]) == sorted(
            range(40), key=lambda i: base10[i]
        )

    def test_smoothing_can_reorder_ranks(self):
        # documents why rank invariance under smoothing is NOT asserted:
        # (2,1) outranks (30,16) raw but not once both are smoothed by 1
        raw = [
            baseline_score(BaselineInputs("a", "t", "h", 2, 1), 0).value,
            baseline_score(BaselineInputs("b", "t", "h", 30, 16), 0).value,
        ]
        smoothed = [
            baseline_score(BaselineInputs("a", "t", "h", 2, 1), 1).value,
            baseline_score(BaselineInputs("b", "t", "h", 30, 16), 1).value,
        ]
        assert raw[0] > raw[1] and smoothed[0] < smoothed[1]

    def test_build_inputs_and_missing_mapping(self, tmp_path):
        map_path = tmp_path / "map.tsv"
        map_path.write_text("film\tfilm\tchalchitra\n", encoding="utf-8")
        freq_path = tmp_path / "freq.tsv"
        freq_path.write_text("film\t100\nchalchitra\t10\n", encoding="utf-8")
        mapping = load_translation_map(map_path)
        freqs = load_frequency_table(freq_path)
        inputs = build_baseline_inputs(["film"], mapping, freqs)
        assert inputs["film"] == BaselineInputs("film", "film", "chalchitra", 100, 10)
        with pytest.raises(MissingMapping) as err:
            build_baseline_inputs(["film", "ghost"], mapping, freqs)
        assert err.value.words == ("ghost",)

    def test_unknown_reference_token_counts_zero(self):
        inputs = build_baseline_inputs(
            ["film"], {"film": ("film", "rare")}, {"film": 5}
        )
        assert inputs["film"].f_l1 == 0


class TestRecountAcrossRatios:
    def test_scores_equal_oracle_ratios(self):
        out = synth.generate(synth.SynthConfig(seed=5, users=40, borrowed_words=6,
                                               mixed_words=6, usage_scale=10,
                                               usage_floor=1, background_tweets=30,
                                               dirty_records=0))
        classes = classes_of(out.tweets)
        for word, _ in out.truth:
            counts = usage_counts(word, out.tweets, classes)
            want = recount_usage(word, out.tweets, classes)
            assert uur(counts).value == ratio(
                want["u_l1"] + want["u_cml1"], want["u_l2"]
            )
            assert utr(counts).value == ratio(
                want["t_l1"] + want["t_cml1"], want["t_l2"]
            )
            assert upr(counts).value == ratio(want["p_l1"], want["p_l2"])
