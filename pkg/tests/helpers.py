"""Fixture builders shared by several test modules."""

import itertools
import math

import numpy as np

BRANDS = ["sony", "bravia", "panasonic", "sharp", "toshiba"]
ITEMS = ["tv", "soundbar", "insurance", "bank loan", "headphones", "camera", "projector", "speaker", "monitor", "remote"]

PROBES = [
    "sony tv",  # exact row
    "Sony  TV",  # same after normalization
    "bravia tvs",
    "sharp soundbars",
    "toshiba bank loans",
    "panasonic camera lens",
    "headphones",
    "quantum chromodynamics",
    "x",
    "cheap flights to osaka",
]


def fifty_rows():
    """50 (product, keyword, volume, clicks, cpc, comp) rows with distinct keywords."""
    rng = np.random.default_rng(50)
    rows = []
    for brand, item in itertools.product(BRANDS, ITEMS):
        product = "Sony TV" if brand in ("sony", "bravia") else "Other"
        rows.append((product, f"{brand} {item}", int(rng.integers(0, 5000)), int(rng.integers(0, 900)), round(float(rng.uniform(0, 3)), 2), round(float(rng.uniform(0, 100)), 1)))
    return rows


def write_rows(path, rows):
    lines = ["product,keyword,search_volume,clicks,cpc,competitor_score"]
    lines += [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def brute_force_match(probe, keywords, embed, threshold=0.6):
    """Index of the best row by exhaustive pairwise cosine, or None."""
    q = embed(probe)
    best, best_score = None, None
    for i, kw in enumerate(keywords):
        score = float(np.dot(q, embed(kw)))
        if best_score is None or score > best_score:
            best, best_score = i, score
    return best if best_score > threshold else None


# textbook metric re-implementations, written with plain loops


def count_occurrences(seq, item):
    return sum(1 for x in seq if x == item)


def grams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def clipped_matches(cand_grams, ref_grams):
    total = 0
    for g in set(cand_grams):
        total += min(count_occurrences(cand_grams, g), count_occurrences(ref_grams, g))
    return total


def textbook_bleu2(cand, ref):
    c, r = len(cand), len(ref)
    bp = 1.0 if c > r else math.exp(1 - r / c)
    p1 = clipped_matches(grams(cand, 1), grams(ref, 1)) / c
    if p1 == 0:
        return 0.0
    if c == 1:
        return bp * p1
    m2 = clipped_matches(grams(cand, 2), grams(ref, 2))
    p2 = m2 / (c - 1) if m2 > 0 else 1 / c
    return bp * math.exp(0.5 * math.log(p1) + 0.5 * math.log(p2))


def textbook_rouge1(cand, ref):
    hits = 0
    for g in set(ref):
        hits += min(count_occurrences(ref, g), count_occurrences(cand, g))
    return hits / len(ref)


def pairwise_f1(cands, refs, embed):
    """Greedy F1 from an explicitly built cosine matrix."""
    cv = [embed(t) for t in cands]
    rv = [embed(t) for t in refs]
    cos = [[float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))) for b in rv] for a in cv]
    p = sum(max(row) for row in cos) / len(cands)
    r = sum(max(cos[i][j] for i in range(len(cands))) for j in range(len(refs))) / len(refs)
    return p, r, (2 * p * r / (p + r) if p + r > 0 else 0.0)


METRIC_CORPUS = [
    ("the cat sat on the mat", "the cat sat on the mat"),
    ("the the the the", "the cat is on the mat"),
    ("cat", "the cat sat"),
    ("dog", "the cat sat"),
    ("sony tv 4k oled", "sony bravia 4k oled tv lineup"),
    ("medical insurance for cancer", "cancer insurance and medical insurance plans"),
    ("a b c d e f g", "a b"),
    ("a b", "a b c d e f g"),
    ("x y z", "z y x"),
    ("sony bank mortgage rates", "mortgage rates at sony bank are low"),
    ("ソニー 保険", "ソニー生命の医療保険"),
    ("医療保険 がん保険", "がん保険と医療保険の比較"),
    ("a a a b b", "a b a b a b"),
    ("one two three four five six", "six five four three two one"),
    ("best tv 2024 reviews", "tv reviews best of 2024"),
    ("insurance", "insurance"),
    ("hdmi cable hdmi cable", "hdmi 2.1 cable"),
    ("cheap flights", "sony tv sale"),
    ("ps5 tv 120hz gaming tv", "gaming tv for ps5 with 120hz and vrr"),
    ("Ｓｏｎｙ ＴＶ", "sony tv"),
]
