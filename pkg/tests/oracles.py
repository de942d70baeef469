"""Independent brute-force oracles for the dual-route checks.

Plain loops and direct textbook formulas only; nothing here may call into
the package paths it is used to verify.
"""

import math


def positional_average_ranks(values):
    """Rank of each value = average of the 1-based positions its ties occupy
    in the descending sort."""
    ordered = sorted(values, reverse=True)
    ranks = []
    for v in values:
        positions = [i + 1 for i, other in enumerate(ordered) if other == v]
        ranks.append(sum(positions) / len(positions))
    return ranks


def pearson(xs, ys):
    n = len(xs)
    sx = sum(xs)
    sy = sum(ys)
    sxx = sum(a * a for a in xs)
    syy = sum(b * b for b in ys)
    sxy = sum(a * b for a, b in zip(xs, ys))
    num = n * sxy - sx * sy
    den = math.sqrt(n * sxx - sx * sx) * math.sqrt(n * syy - sy * sy)
    if den == 0:
        return float("nan")
    return num / den


def spearman_from_scores(scores1, scores2):
    """Direct Pearson-on-ranks over two word->score dicts."""
    words = sorted(scores1)
    assert sorted(scores2) == words
    r1 = positional_average_ranks([scores1[w] for w in words])
    r2 = positional_average_ranks([scores2[w] for w in words])
    return pearson(r1, r2)


def fleiss_kappa(table):
    """Straight transcription of the agreement statistic's definition."""
    n_items = len(table)
    n_raters = sum(table[0])
    n_cats = len(table[0])
    p_i = [
        (sum(c * c for c in row) - n_raters) / (n_raters * (n_raters - 1))
        for row in table
    ]
    p_bar = sum(p_i) / n_items
    p_j = [sum(row[j] for row in table) / (n_items * n_raters) for j in range(n_cats)]
    p_e = sum(p * p for p in p_j)
    if p_e == 1.0:
        return 1.0
    return (p_bar - p_e) / (1 - p_e)


def classify_tags(tags, mono=0.9, band=0.05, trail=2):
    """Second implementation of the six-way rules over 'h'/'e'/'n'/'o' chars.

    Returns the class name string, or None when no L1/L2 content exists.
    """
    content = [c for c in tags if c in ("h", "e")]
    if not content:
        return None
    f1 = content.count("h") / len(content)
    if f1 > mono:
        return "MONO_L1"
    if (1 - f1) > mono:
        return "MONO_L2"
    runs = []
    for c in content:
        if runs and runs[-1][0] == c:
            runs[-1][1] += 1
        else:
            runs.append([c, 1])
    if len(runs) == 2 and runs[0][1] >= trail and runs[1][1] >= trail:
        return "CS"
    if abs(f1 - 0.5) <= band:
        return "CM_EQ"
    return "CM_L1" if f1 > 0.5 else "CM_L2"


def recount_usage(word, tweets, classes):
    """Brute-force usage recount; returns the 8 counts as a plain dict.

    Walks every tweet with naive loops: containment by lowercase text,
    user/tweet columns keyed by the tweet's class name, phrase columns by
    scanning explicit spans or same-tag stretches found by index walking.
    """
    word = word.lower()
    users = {"l1": [], "cml1": [], "l2": []}
    tweet_counts = {"l1": 0, "cml1": 0, "l2": 0}
    p_l1 = 0
    p_l2 = 0
    for tw in tweets:
        texts = [t.text.lower() for t in tw.tokens]
        if word in texts:
            name = classes[tw.id].value if tw.id in classes else None
            key = {"MONO_L1": "l1", "CM_L1": "cml1", "MONO_L2": "l2"}.get(name)
            if key:
                tweet_counts[key] += 1
                if tw.user_id not in users[key]:
                    users[key].append(tw.user_id)
        if tw.phrases:
            spans = [(s.start, s.end, s.tag.value) for s in tw.phrases]
        else:
            spans = []
            i = 0
            tags = [t.tag.value for t in tw.tokens]
            while i < len(tags):
                j = i
                while j < len(tags) and tags[j] == tags[i]:
                    j += 1
                spans.append((i, j, tags[i]))
                i = j
        for start, end, tag in spans:
            if tag in ("L1", "L2") and word in texts[start:end]:
                if tag == "L1":
                    p_l1 += 1
                else:
                    p_l2 += 1
    return {
        "u_l1": len(users["l1"]),
        "u_cml1": len(users["cml1"]),
        "u_l2": len(users["l2"]),
        "t_l1": tweet_counts["l1"],
        "t_cml1": tweet_counts["cml1"],
        "t_l2": tweet_counts["l2"],
        "p_l1": p_l1,
        "p_l2": p_l2,
    }


def ratio(numerator, denominator):
    if denominator > 0:
        return numerator / denominator
    return math.inf if numerator > 0 else 0.0
