"""Command-line pipeline: ingest, classify, select, score, rank, evaluate.

Every JSON report embeds the exact options it ran with plus sha256 digests
of its inputs, so rerunning a command on unchanged inputs reproduces the
report byte for byte. Exit codes: 0 ok, 1 usage error, 2 data error.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
import sys
from pathlib import Path

import click

from . import candidates as cand
from . import classify as cls
from . import corpus as corp
from . import eval as ev
from . import metrics as met
from . import service as svc
from . import synth as syn


class DataError(click.ClickException):
    exit_code = 2


def _data_errors(module: str):
    """Decorator: surface domain errors as exit-2 failures with context."""

    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except (
                ValueError,
                KeyError,
                OSError,
                ev.WordSetMismatch,
                cand.EmptyCandidateSet,
                met.MissingMapping,
            ) as exc:
                raise DataError(f"[{module}] {exc}") from exc

        return inner

    return wrap


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _report_skeleton(command: str, options: dict, inputs: dict[str, str]) -> dict:
    return {
        "command": command,
        "config": {k: v for k, v in sorted(options.items())},
        "inputs": {
            name: {"path": str(path), "sha256": _sha256(path)}
            for name, path in sorted(inputs.items())
            if path is not None
        },
    }


def _read_words(path: str | Path) -> list[str]:
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.append(line.lower())
    if not words:
        raise DataError(f"no words in {path}")
    return words


def _read_wordset(path: str | Path | None) -> frozenset[str] | None:
    if path is None:
        return None
    return frozenset(_read_words(path))


def _read_truth_scores(path: str | Path) -> dict[str, float]:
    scores = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected word<TAB>score")
            scores[parts[0].lower()] = float(parts[1])
    return scores


def _format_value(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return repr(value)


def _write_scores_tsv(
    path: str | Path,
    rows: list[tuple[str, met.MetricScore]],
    flag_name: str = "zero_denominator",
    header_note: str | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        for metric_name, score in rows:
            flags = flag_name if score.denominator_zero else "-"
            fh.write(
                f"{score.word}\t{metric_name}\t{_format_value(score.value)}\t{flags}\n"
            )


def _read_scores_tsv(path: str | Path, metric: str) -> dict[str, float]:
    scores = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            word, name, value, _flags = line.split("\t")
            if name == metric:
                scores[word] = float(value)
    if not scores:
        raise DataError(f"no rows for metric {metric!r} in {path}")
    return scores


def _load_classes_tsv(path: str | Path) -> dict[str, cls.TweetClass]:
    classes = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            tweet_id, name = line.split("\t")
            classes[tweet_id] = cls.TweetClass(name)
    return classes


def _classifier_config(options: dict) -> cls.ClassifierConfig:
    return cls.ClassifierConfig(
        mono_threshold=options["mono_threshold"],
        eq_band=options["eq_band"],
        min_trail=options["min_trail"],
    )


def _load_corpus_and_classes(
    corpus_path: str,
    classes_path: str | None,
    options: dict,
) -> tuple[list[corp.TaggedTweet], dict[str, cls.TweetClass]]:
    tweets, _report = corp.read_corpus(corpus_path)
    if classes_path:
        classes = _load_classes_tsv(classes_path)
    else:
        classes = cls.classify_corpus(tweets, _classifier_config(options)).classes
    return tweets, classes


def _rho_or_none(value: float) -> float | None:
    return None if math.isnan(value) else value


# -- option groups -----------------------------------------------------------

def classifier_options(fn):
    fn = click.option("--mono-threshold", type=float, default=0.9, show_default=True)(fn)
    fn = click.option("--eq-band", type=float, default=0.05, show_default=True)(fn)
    fn = click.option("--min-trail", type=int, default=2, show_default=True)(fn)
    return fn


def mix_options(fn):
    fn = click.option("--mix-low", type=float, default=0.07, show_default=True)(fn)
    fn = click.option("--mix-high", type=float, default=0.20, show_default=True)(fn)
    return fn


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file whose keys override same-named command options.",
)
@click.pass_context
def cli(ctx, config_path):
    """Quantify how likely foreign words are to be borrowed, from usage signals."""
    overrides = {}
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise click.UsageError("--config must contain a JSON object")
    ctx.obj = overrides


def _apply_config(ctx, options: dict) -> dict:
    overrides = ctx.obj or {}
    merged = dict(options)
    for key, value in overrides.items():
        if key in merged:
            merged[key] = value
    return merged


# -- commands -----------------------------------------------------------------

@cli.command("ingest")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option(
    "--allow-range",
    "allow_ranges",
    multiple=True,
    help="Extra allowed codepoint range LO-HI (hex or decimal), repeatable.",
)
@click.pass_context
@_data_errors("corpus")
def ingest_cmd(ctx, corpus_path, out_path, report_path, allow_ranges):
    """Filter a raw corpus file; write kept tweets and a drop report."""
    options = _apply_config(
        ctx, {"corpus": corpus_path, "out": out_path, "allow_range": list(allow_ranges)}
    )
    allowed = corp.DEFAULT_ROMANIZED_CODEPOINTS
    for spec_str in options["allow_range"]:
        lo, _, hi = spec_str.partition("-")
        allowed = allowed | frozenset(range(int(lo, 0), int(hi or lo, 0) + 1))
    tweets, report = corp.read_corpus(options["corpus"], allowed)
    corp.write_corpus(options["out"], tweets)
    payload = _report_skeleton("ingest", options, {"corpus": options["corpus"]})
    payload["report"] = report.as_dict()
    if report_path:
        _write_json(report_path, payload)
    click.echo(
        f"kept {report.kept}/{report.total} tweets "
        f"(dropped: {json.dumps(report.as_dict()['dropped'])})"
    )


@cli.command("classify")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--classes-out", type=click.Path(), required=True)
@click.option("--histogram-out", type=click.Path(), default=None)
@classifier_options
@click.pass_context
@_data_errors("classify")
def classify_cmd(ctx, corpus_path, classes_out, histogram_out, **flags):
    """Assign each tweet one of the six mix categories."""
    options = _apply_config(ctx, {"corpus": corpus_path, **flags})
    tweets, _ = corp.read_corpus(options["corpus"])
    result = cls.classify_corpus(tweets, _classifier_config(options))
    with open(classes_out, "w", encoding="utf-8") as fh:
        for tweet in tweets:
            if tweet.id in result.classes:
                fh.write(f"{tweet.id}\t{result.classes[tweet.id].value}\n")
    if histogram_out:
        payload = _report_skeleton("classify", options, {"corpus": options["corpus"]})
        payload["histogram"] = result.histogram_json()
        payload["classified"] = len(result.classes)
        payload["unclassifiable"] = len(result.unclassifiable)
        _write_json(histogram_out, payload)
    click.echo(
        f"classified {len(result.classes)} tweets, "
        f"{len(result.unclassifiable)} unclassifiable"
    )


@cli.command("candidates")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--classes", "classes_path", type=click.Path(exists=True), default=None)
@click.option("--top-n", type=int, default=1000, show_default=True)
@click.option("--stopwords", "stopwords_path", type=click.Path(exists=True), default=None)
@click.option("--allowlist", "allowlist_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@classifier_options
@click.pass_context
@_data_errors("candidates")
def candidates_cmd(
    ctx, corpus_path, classes_path, top_n, stopwords_path, allowlist_path, out_path, **flags
):
    """Select the most frequent foreign words used in code-mixed tweets."""
    options = _apply_config(
        ctx, {"corpus": corpus_path, "classes": classes_path, "top_n": top_n, **flags}
    )
    tweets, classes = _load_corpus_and_classes(
        options["corpus"], options["classes"], options
    )
    stop = _read_wordset(stopwords_path) or frozenset()
    allow = _read_wordset(allowlist_path)
    selected = cand.select_candidates(
        tweets, classes, top_n=options["top_n"], stopwords=stop, allowlist=allow
    )
    with open(out_path, "w", encoding="utf-8") as fh:
        for word in selected:
            fh.write(f"{word.text}\t{word.foreign_freq}\n")
    click.echo(f"{len(selected)} candidate words -> {out_path}")


@cli.command("features")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--classes", "classes_path", type=click.Path(exists=True), default=None)
@click.option("--words", "words_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@classifier_options
@click.pass_context
@_data_errors("candidates")
def features_cmd(ctx, corpus_path, classes_path, words_path, out_path, **flags):
    """Write the 24-column context-feature table for the given words."""
    options = _apply_config(ctx, {"corpus": corpus_path, "classes": classes_path, **flags})
    tweets, classes = _load_corpus_and_classes(
        options["corpus"], options["classes"], options
    )
    words = _read_words(words_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("word\t" + "\t".join(cand.FEATURE_COLUMNS) + "\n")
        for word in words:
            vec = cand.context_features(word, tweets, classes)
            cells = "\t".join(repr(v) for v in vec.values)
            fh.write(f"{vec.word}\t{cells}\n")
    click.echo(f"{len(words)} feature vectors -> {out_path}")


def _read_features_tsv(path: str | Path) -> list[cand.ContextFeatureVector]:
    vectors = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["word", *cand.FEATURE_COLUMNS]:
            raise DataError(f"{path}: unexpected feature header")
        for line in fh:
            if not line.strip():
                continue
            word, *cells = line.rstrip("\n").split("\t")
            values = tuple(float(c) for c in cells)
            vectors.append(
                cand.ContextFeatureVector(
                    word=word,
                    values=values,
                    category_counts=(0, 0, 0),
                    empty=all(v == 0 for v in values),
                )
            )
    if not vectors:
        raise DataError(f"no feature rows in {path}")
    return vectors


@cli.command("cluster")
@click.option("--features", "features_path", type=click.Path(exists=True), required=True)
@click.option("--k-min", type=int, default=2, show_default=True)
@click.option("--k-max", type=int, default=8, show_default=True)
@click.option("--k", "forced_k", type=int, default=None, help="Skip the elbow, force k.")
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_context
@_data_errors("candidates")
def cluster_cmd(ctx, features_path, k_min, k_max, forced_k, seed, out_path):
    """Cluster context features with k-means; the SSE elbow picks k."""
    options = _apply_config(
        ctx,
        {"features": features_path, "k_min": k_min, "k_max": k_max,
         "k": forced_k, "seed": seed},
    )
    vectors = _read_features_tsv(options["features"])
    model = cand.cluster(
        vectors,
        k_range=(options["k_min"], options["k_max"]),
        seed=options["seed"],
        forced_k=options["k"],
    )
    payload = _report_skeleton("cluster", options, {"features": options["features"]})
    payload["k"] = model.k
    payload["sse"] = model.sse
    payload["sse_by_k"] = {str(k): v for k, v in sorted(model.sse_by_k.items())}
    payload["assignment"] = model.assignment
    payload["centroids"] = [list(c) for c in model.centroids]
    _write_json(out_path, payload)
    click.echo(f"k={model.k}, sse={model.sse:.6f} -> {out_path}")


@cli.command("sample")
@click.option("--cluster", "cluster_path", type=click.Path(exists=True), required=True)
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--metric", default="baseline", show_default=True)
@click.option("--mws-count", type=int, default=27, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_context
@_data_errors("candidates")
def sample_cmd(ctx, cluster_path, scores_path, metric, mws_count, seed, out_path):
    """Draw the target-word sample from cluster extremes plus a middle draw."""
    options = _apply_config(
        ctx,
        {"cluster": cluster_path, "scores": scores_path, "metric": metric,
         "mws_count": mws_count, "seed": seed},
    )
    with open(options["cluster"], encoding="utf-8") as fh:
        cluster_report = json.load(fh)
    model = cand.ClusterModel(
        k=cluster_report["k"],
        centroids=tuple(tuple(c) for c in cluster_report["centroids"]),
        assignment=dict(cluster_report["assignment"]),
        sse=cluster_report["sse"],
        sse_history=(),
        sse_by_k={},
    )
    scores = _read_scores_tsv(options["scores"], options["metric"])
    plan = cand.sample_targets(model, scores, options["mws_count"], options["seed"])
    payload = _report_skeleton(
        "sample", options, {"cluster": options["cluster"], "scores": options["scores"]}
    )
    payload["hlws"] = list(plan.hlws)
    payload["mws"] = list(plan.mws)
    payload["full"] = list(plan.full)
    _write_json(out_path, payload)
    click.echo(f"hlws={len(plan.hlws)} mws={len(plan.mws)} -> {out_path}")


def _metric_scores_for_words(
    words: list[str],
    tweets: list[corp.TaggedTweet],
    classes: dict[str, cls.TweetClass],
    user_subset: frozenset[str] | None = None,
) -> tuple[dict[str, dict[str, met.MetricScore]], list[met.WordUsageCounts]]:
    by_metric: dict[str, dict[str, met.MetricScore]] = {"uur": {}, "utr": {}, "upr": {}}
    counts_rows = []
    for word in words:
        counts = met.usage_counts(word, tweets, classes, user_subset=user_subset)
        counts_rows.append(counts)
        by_metric["uur"][word] = met.uur(counts)
        by_metric["utr"][word] = met.utr(counts)
        by_metric["upr"][word] = met.upr(counts)
    return by_metric, counts_rows


@cli.command("metrics")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--classes", "classes_path", type=click.Path(exists=True), default=None)
@click.option("--words", "words_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--counts-out", type=click.Path(), default=None)
@classifier_options
@click.pass_context
@_data_errors("metrics")
def metrics_cmd(ctx, corpus_path, classes_path, words_path, out_path, counts_out, **flags):
    """Compute usage counts and the three usage-ratio scores per word."""
    options = _apply_config(ctx, {"corpus": corpus_path, "classes": classes_path, **flags})
    tweets, classes = _load_corpus_and_classes(
        options["corpus"], options["classes"], options
    )
    words = _read_words(words_path)
    by_metric, counts_rows = _metric_scores_for_words(words, tweets, classes)
    derived = any(not t.phrases for t in tweets)
    rows = [
        (name, by_metric[name][word])
        for word in words
        for name in ("uur", "utr", "upr")
    ]
    _write_scores_tsv(
        out_path,
        rows,
        header_note="phrase_spans=derived_for_some_tweets" if derived else None,
    )
    if counts_out:
        with open(counts_out, "w", encoding="utf-8") as fh:
            fh.write("word\tu_l1\tu_cml1\tu_l2\tt_l1\tt_cml1\tt_l2\tp_l1\tp_l2\n")
            for c in counts_rows:
                fh.write(
                    f"{c.word}\t{c.u_l1}\t{c.u_cml1}\t{c.u_l2}"
                    f"\t{c.t_l1}\t{c.t_cml1}\t{c.t_l2}\t{c.p_l1}\t{c.p_l2}\n"
                )
    click.echo(f"{len(words)} words scored -> {out_path}")


@cli.command("baseline")
@click.option("--words", "words_path", type=click.Path(exists=True), required=True)
@click.option("--translation-map", "map_path", type=click.Path(exists=True), required=True)
@click.option("--ref-freqs", "freqs_path", type=click.Path(exists=True), required=True)
@click.option("--smoothing", type=float, default=1.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_context
@_data_errors("metrics")
def baseline_cmd(ctx, words_path, map_path, freqs_path, smoothing, out_path):
    """Score words by the reference-corpus log frequency ratio."""
    options = _apply_config(
        ctx,
        {"words": words_path, "translation_map": map_path,
         "ref_freqs": freqs_path, "smoothing": smoothing},
    )
    words = _read_words(options["words"])
    mapping = met.load_translation_map(options["translation_map"])
    freqs = met.load_frequency_table(options["ref_freqs"])
    inputs = met.build_baseline_inputs(words, mapping, freqs)
    rows = [
        ("baseline", met.baseline_score(inputs[w], options["smoothing"]))
        for w in words
    ]
    _write_scores_tsv(out_path, rows, flag_name="zero_raw_count")
    click.echo(f"{len(words)} baseline scores -> {out_path}")


@cli.command("rank")
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--metric", required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_context
@_data_errors("eval")
def rank_cmd(ctx, scores_path, metric, out_path):
    """Turn a scores table into a tie-averaged rank list."""
    options = _apply_config(ctx, {"scores": scores_path, "metric": metric})
    scores = _read_scores_tsv(options["scores"], options["metric"])
    ranking = ev.rank(scores)
    with open(out_path, "w", encoding="utf-8") as fh:
        for item in ranking.items:
            fh.write(f"{item.rank}\t{item.word}\t{_format_value(item.score)}\n")
    click.echo(f"{len(ranking)} ranked words -> {out_path}")


def _read_rank_tsv(path: str | Path) -> ev.RankList:
    scores = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            _rank_value, word, score = line.rstrip("\n").split("\t")
            scores[word] = float(score)
    return ev.rank(scores)


def _survey_records(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("kind") == "response":
                records.append(obj)
    return records


def _bucket_section(
    metric_ranks: dict[str, ev.RankList], truth_rank: ev.RankList
) -> tuple[dict, dict, dict]:
    truth_buckets = ev.buckets(truth_rank)
    counts = {
        "truth": {label: len(words) for label, words in truth_buckets.by_label.items()}
    }
    per_bucket = {}
    aggregates = {}
    for name, ranking in metric_ranks.items():
        pred = ev.buckets(ranking)
        counts[name] = {label: len(words) for label, words in pred.by_label.items()}
        result = ev.bucket_eval(pred, truth_buckets)
        per_bucket[name] = {
            label: {
                "tp": conf.tp,
                "fp": conf.fp,
                "tn": conf.tn,
                "precision": conf.precision,
                "recall": conf.recall,
            }
            for label, conf in result.per_bucket.items()
        }
        aggregates[name] = {
            "macro_precision": result.macro_precision,
            "macro_recall": result.macro_recall,
            "micro_precision": result.micro_precision,
            "micro_recall": result.micro_recall,
        }
    return counts, per_bucket, aggregates


@cli.command("evaluate")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--classes", "classes_path", type=click.Path(exists=True), default=None)
@click.option("--words", "words_path", type=click.Path(exists=True), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True), default=None,
              help="Ground-truth scores TSV (word<TAB>score).")
@click.option("--survey-export", "survey_path", type=click.Path(exists=True), default=None,
              help="Annotator-service survey export; enables age cohort tables.")
@click.option("--translation-map", "map_path", type=click.Path(exists=True), default=None)
@click.option("--ref-freqs", "freqs_path", type=click.Path(exists=True), default=None)
@click.option("--smoothing", type=float, default=1.0, show_default=True)
@click.option("--sample-plan", "plan_path", type=click.Path(exists=True), default=None)
@click.option("--reannotation-export", "reann_path", type=click.Path(exists=True), default=None)
@click.option("--age-cut", type=int, default=30, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@classifier_options
@mix_options
@click.pass_context
@_data_errors("eval")
def evaluate_cmd(
    ctx, corpus_path, classes_path, words_path, truth_path, survey_path,
    map_path, freqs_path, smoothing, plan_path, reann_path, age_cut,
    out_path, mix_low, mix_high, **flags
):
    """Full evaluation report: rank correlations, bucket tables, cohorts."""
    options = _apply_config(
        ctx,
        {"corpus": corpus_path, "classes": classes_path, "words": words_path,
         "truth": truth_path, "survey_export": survey_path,
         "translation_map": map_path, "ref_freqs": freqs_path,
         "smoothing": smoothing, "sample_plan": plan_path,
         "reannotation_export": reann_path, "age_cut": age_cut,
         "mix_low": mix_low, "mix_high": mix_high, **flags},
    )
    if not options["truth"] and not options["survey_export"]:
        raise click.UsageError("need --truth or --survey-export for ground truth")

    tweets, classes = _load_corpus_and_classes(
        options["corpus"], options["classes"], options
    )
    words = _read_words(words_path)

    # ground truth ranking
    survey_records = (
        _survey_records(options["survey_export"]) if options["survey_export"] else []
    )
    if options["truth"]:
        truth_scores = _read_truth_scores(options["truth"])
    else:
        tallies = ev.tally_responses(
            [(r["word"], r["choice"]) for r in survey_records]
        )
        truth_scores = {t.word: float(t.lpf) for t in tallies}
    _require_same_words(words, truth_scores, "ground truth")
    truth_rank = ev.rank(truth_scores)

    # metric rankings
    by_metric, _counts = _metric_scores_for_words(words, tweets, classes)
    metric_scores = {
        name: {w: s.value for w, s in scores.items()}
        for name, scores in by_metric.items()
    }
    if options["translation_map"] and options["ref_freqs"]:
        mapping = met.load_translation_map(options["translation_map"])
        freqs = met.load_frequency_table(options["ref_freqs"])
        baseline_inputs = met.build_baseline_inputs(words, mapping, freqs)
        metric_scores["baseline"] = {
            w: met.baseline_score(baseline_inputs[w], options["smoothing"]).value
            for w in words
        }
    metric_ranks = {name: ev.rank(scores) for name, scores in metric_scores.items()}

    payload = _report_skeleton(
        "evaluate",
        options,
        {
            "corpus": options["corpus"],
            "classes": options["classes"],
            "words": words_path,
            "truth": options["truth"],
            "survey_export": options["survey_export"],
            "translation_map": options["translation_map"],
            "ref_freqs": options["ref_freqs"],
            "sample_plan": options["sample_plan"],
            "reannotation_export": options["reannotation_export"],
        },
    )

    # rank correlation table (optionally per sample-plan subset)
    subsets: dict[str, list[str]] = {"full": words}
    if options["sample_plan"]:
        with open(options["sample_plan"], encoding="utf-8") as fh:
            plan = json.load(fh)
        subsets["hlws"] = [w for w in plan["hlws"] if w in truth_scores]
        subsets["mws"] = [w for w in plan["mws"] if w in truth_scores]
    spearman_table: dict[str, dict[str, float | None]] = {}
    for name, scores in metric_scores.items():
        row = {}
        for subset_name, subset in subsets.items():
            if len(subset) < 2:
                row[subset_name] = None
                continue
            sub_rank = ev.rank({w: scores[w] for w in subset})
            sub_truth = ev.rank({w: truth_scores[w] for w in subset})
            row[subset_name] = _rho_or_none(ev.spearman(sub_rank, sub_truth))
        spearman_table[name] = row
    payload["spearman"] = spearman_table

    counts, per_bucket, aggregates = _bucket_section(metric_ranks, truth_rank)
    payload["bucket_counts"] = counts
    payload["bucket_precision_recall"] = per_bucket
    payload["macro_micro"] = aggregates

    if survey_records:
        payload["age_cohorts"] = _age_cohort_section(
            survey_records, options["age_cut"], words, metric_scores
        )

    payload["mixing_cohorts"] = _mixing_cohort_section(
        tweets, classes, words, truth_rank, options["mix_low"], options["mix_high"]
    )

    if options["reannotation_export"]:
        payload["reannotation"] = _reannotation_section(
            options["reannotation_export"]
        )

    _write_json(out_path, payload)
    click.echo(f"evaluation report -> {out_path}")


def _require_same_words(words: list[str], scores: dict[str, float], what: str) -> None:
    have = set(scores)
    want = set(words)
    if have != want:
        raise ev.WordSetMismatch(want - have, have - want)


def _age_cohort_section(
    survey_records: list[dict],
    age_cut: int,
    words: list[str],
    metric_scores: dict[str, dict[str, float]],
) -> dict:
    young_tallies, elder_tallies = ev.cohort_split(
        [(r["age"], r["word"], r["choice"]) for r in survey_records], age_cut
    )
    section: dict = {}
    for cohort_name, tallies in (("young", young_tallies), ("elder", elder_tallies)):
        if not tallies:
            section[cohort_name] = {"note": "no responses in cohort"}
            continue
        truth_scores = {t.word: float(t.lpf) for t in tallies}
        _require_same_words(words, truth_scores, f"{cohort_name} cohort")
        truth_rank = ev.rank(truth_scores)
        metric_ranks = {
            name: ev.rank(scores) for name, scores in metric_scores.items()
        }
        counts, per_bucket, aggregates = _bucket_section(metric_ranks, truth_rank)
        section[cohort_name] = {
            "responses": sum(t.count_en + t.count_hi + t.count_none for t in tallies),
            "spearman": {
                name: _rho_or_none(ev.spearman(metric_ranks[name], truth_rank))
                for name in metric_ranks
            },
            "bucket_counts": counts,
            "bucket_precision_recall": per_bucket,
            "macro_micro": aggregates,
        }
    return section


def _mixing_cohort_section(
    tweets: list[corp.TaggedTweet],
    classes: dict[str, cls.TweetClass],
    words: list[str],
    truth_rank: ev.RankList,
    mix_low: float,
    mix_high: float,
) -> dict:
    buckets_by_user = cls.user_mix_buckets(tweets, classes, mix_low, mix_high)
    section = {}
    for bucket in (cls.MixBucket.HIGH, cls.MixBucket.MID, cls.MixBucket.LOW):
        users = buckets_by_user[bucket]
        entry: dict = {"users": len(users)}
        if users:
            scores = {}
            for word in words:
                counts = met.cohort_counts(word, tweets, classes, users)
                scores[word] = met.uur(counts).value
            entry["uur_spearman"] = _rho_or_none(
                ev.spearman(ev.rank(scores), truth_rank)
            )
        else:
            entry["uur_spearman"] = None
        section[bucket.value] = entry
    return section


def _reannotation_section(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("kind") == "response":
                records.append(
                    (
                        obj["word"],
                        obj["stratum"],
                        obj["context_mode"],
                        obj["annotator_id"],
                        bool(obj["flipped"]),
                    )
                )
    stats = ev.reannotation_stats(records)
    return [
        {
            "stratum": s.stratum,
            "context": s.context,
            "mu": s.mu,
            "sigma": s.sigma,
            "kappa": s.kappa,
            "kappa_note": s.kappa_note,
            "words": s.n_words,
        }
        for s in stats
    ]


@cli.command("cohorts")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--classes", "classes_path", type=click.Path(exists=True), default=None)
@click.option("--words", "words_path", type=click.Path(exists=True), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@classifier_options
@mix_options
@click.pass_context
@_data_errors("eval")
def cohorts_cmd(
    ctx, corpus_path, classes_path, words_path, truth_path, out_path,
    mix_low, mix_high, **flags
):
    """Mixing-extent cohort table: per user bucket, UUR rank correlation."""
    options = _apply_config(
        ctx,
        {"corpus": corpus_path, "classes": classes_path, "words": words_path,
         "truth": truth_path, "mix_low": mix_low, "mix_high": mix_high, **flags},
    )
    tweets, classes = _load_corpus_and_classes(
        options["corpus"], options["classes"], options
    )
    words = _read_words(words_path)
    truth_scores = _read_truth_scores(options["truth"])
    _require_same_words(words, truth_scores, "ground truth")
    truth_rank = ev.rank(truth_scores)
    payload = _report_skeleton(
        "cohorts",
        options,
        {"corpus": options["corpus"], "classes": options["classes"],
         "truth": options["truth"]},
    )
    payload["mixing_cohorts"] = _mixing_cohort_section(
        tweets, classes, words, truth_rank, options["mix_low"], options["mix_high"]
    )
    _write_json(out_path, payload)
    click.echo(f"cohort report -> {out_path}")


@cli.command("reannotate-prep")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--rank", "rank_path", type=click.Path(exists=True), required=True)
@click.option("--per-stratum", type=int, default=20, show_default=True)
@click.option("--modes", default="H_all,H_most", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_context
@_data_errors("eval")
def reannotate_prep_cmd(
    ctx, corpus_path, rank_path, per_stratum, modes, seed, out_path, report_path
):
    """Draw strata words and pick one native-context tweet per word."""
    options = _apply_config(
        ctx,
        {"corpus": corpus_path, "rank": rank_path, "per_stratum": per_stratum,
         "modes": modes, "seed": seed},
    )
    tweets, _report = corp.read_corpus(options["corpus"])
    by_id = {t.id: t for t in tweets}
    ranking = _read_rank_tsv(options["rank"])
    mode_list = [m.strip() for m in options["modes"].split(",") if m.strip()]
    tasks = []
    shortfalls: dict[str, dict[str, list[str]]] = {}
    for mode in mode_list:
        strata = ev.reannotation_strata(
            ranking, options["per_stratum"], seed=f"{options['seed']}:{mode}"
        )
        for stratum, stratum_words in strata.items():
            picks, shortfall = ev.sample_context_tweets(
                stratum_words, tweets, mode, seed=f"{options['seed']}:{mode}:{stratum}"
            )
            if shortfall:
                shortfalls.setdefault(mode, {})[stratum] = shortfall
            for word in stratum_words:
                pick = picks.get(word)
                if pick is None:
                    continue
                tweet = by_id[pick.tweet_id]
                tasks.append(
                    {
                        "task_id": f"r{len(tasks):04d}",
                        "word": word,
                        "stratum": stratum,
                        "context_mode": mode,
                        "tweet_id": tweet.id,
                        "tokens": [
                            {"t": tok.text, "g": tok.tag.value} for tok in tweet.tokens
                        ],
                        "target_index": pick.target_index,
                    }
                )
    with open(out_path, "w", encoding="utf-8") as fh:
        for task in tasks:
            fh.write(json.dumps(task, sort_keys=True) + "\n")
    if report_path:
        payload = _report_skeleton(
            "reannotate-prep",
            options,
            {"corpus": options["corpus"], "rank": options["rank"]},
        )
        payload["tasks"] = len(tasks)
        payload["shortfall"] = shortfalls
        _write_json(report_path, payload)
    click.echo(f"{len(tasks)} re-annotation tasks -> {out_path}")


@cli.command("reannotate-stats")
@click.option("--export", "export_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_context
@_data_errors("eval")
def reannotate_stats_cmd(ctx, export_path, out_path):
    """Flip-rate table (mean, spread, agreement) from a re-annotation export."""
    options = _apply_config(ctx, {"export": export_path})
    payload = _report_skeleton("reannotate-stats", options, {"export": options["export"]})
    payload["reannotation"] = _reannotation_section(options["export"])
    _write_json(out_path, payload)
    click.echo(f"re-annotation stats -> {out_path}")


@cli.command("serve")
@click.option("--data-dir", type=click.Path(), required=True)
@click.option("--survey-items", "items_path", type=click.Path(exists=True), default=None)
@click.option("--tasks", "tasks_path", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8077, show_default=True)
@click.pass_context
@_data_errors("annotator-service")
def serve_cmd(ctx, data_dir, items_path, tasks_path, host, port):
    """Run the annotation collection service."""
    import uvicorn

    options = _apply_config(
        ctx,
        {"data_dir": data_dir, "survey_items": items_path, "tasks": tasks_path,
         "host": host, "port": port},
    )
    items = svc.load_survey_items(options["survey_items"]) if options["survey_items"] else []
    tasks = svc.load_reannotation_tasks(options["tasks"]) if options["tasks"] else []
    store = svc.AnnotationStore(options["data_dir"], items, tasks)
    app = svc.create_app(store)
    uvicorn.run(app, host=options["host"], port=options["port"], log_level="warning")


@cli.command("synth")
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--users", type=int, default=60, show_default=True)
@click.option("--borrowed-words", type=int, default=30, show_default=True)
@click.option("--mixed-words", type=int, default=27, show_default=True)
@click.option("--usage-scale", type=int, default=40, show_default=True)
@click.option("--usage-floor", type=int, default=2, show_default=True)
@click.option("--background-tweets", type=int, default=200, show_default=True)
@click.option("--dirty-records", type=int, default=6, show_default=True)
@click.pass_context
@_data_errors("synth")
def synth_cmd(ctx, seed, out_dir, **sizes):
    """Generate a synthetic corpus with a planted borrowing signal."""
    options = _apply_config(ctx, {"seed": seed, "out": out_dir, **sizes})
    cfg = syn.SynthConfig(
        seed=options["seed"],
        users=options["users"],
        borrowed_words=options["borrowed_words"],
        mixed_words=options["mixed_words"],
        usage_scale=options["usage_scale"],
        usage_floor=options["usage_floor"],
        background_tweets=options["background_tweets"],
        dirty_records=options["dirty_records"],
    )
    output = syn.generate(cfg)
    paths = syn.write_output(output, options["out"])
    click.echo(
        f"{len(output.tweets)} tweets (+{len(output.dirty_lines)} dirty lines) "
        f"-> {paths.corpus}"
    )


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
