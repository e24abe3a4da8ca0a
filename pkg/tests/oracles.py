"""Independent reference implementations used only to cross-check the package.

Everything here is deliberately written from the definitions, in a different
style from the package code, so a shared bug is unlikely.
"""

from __future__ import annotations

import math
import random
import re
from collections import Counter


def oracle_tokenize(text: str) -> list[str]:
    return re.findall(r"[a-z0-9£]+", text.lower())


def oracle_bleu(candidate: str, references: list[str]) -> float:
    """Sentence BLEU-4, brevity penalty, add-one smoothing for n >= 2."""
    cand = oracle_tokenize(candidate)
    refs = [oracle_tokenize(r) for r in references]
    precisions: list[float] = []
    for n in range(1, 5):
        cand_grams = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
        best = Counter()
        for ref in refs:
            ref_grams = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
            for gram in cand_grams:
                best[gram] = max(best[gram], ref_grams[gram])
        clipped = sum(min(cand_grams[g], best[g]) for g in cand_grams)
        total = sum(cand_grams.values())
        if n == 1:
            if clipped == 0:
                return 0.0
            precisions.append(clipped / total)
        else:
            precisions.append((clipped + 1) / (total + 1))
    ref_len = min((len(r) for r in refs), key=lambda L: (abs(L - len(cand)), L))
    brevity = 1.0 if len(cand) > ref_len else math.exp(1 - ref_len / len(cand))
    return brevity * math.prod(p ** 0.25 for p in precisions)


def oracle_pearson(xs: list[float], ys: list[float]) -> float:
    """Pearson r straight from the definition."""
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    cov = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = math.fsum((x - mean_x) ** 2 for x in xs)
    var_y = math.fsum((y - mean_y) ** 2 for y in ys)
    return cov / math.sqrt(var_x * var_y)


def oracle_greedy_diverse(
    texts: list[str], k: int, similarity, seed: int
) -> list[int]:
    """Brute-force greedy selection over pool indices.

    Mirrors the documented procedure: seeded-uniform first pick, then repeat
    k-1 times choosing the unselected index with the lowest mean similarity
    to the selected set, ties broken by the smallest pool index.
    """
    rng = random.Random(seed)
    chosen = [rng.randrange(len(texts))]
    while len(chosen) < k:
        candidates = [i for i in range(len(texts)) if i not in chosen]
        means = []
        for i in candidates:
            sims = [similarity(texts[i], texts[j]) for j in chosen]
            means.append(sum(sims) / len(sims))
        lowest = min(means)
        for i, mean in zip(candidates, means):
            if mean == lowest:
                chosen.append(i)
                break
    return chosen


def oracle_rf_product(terms: list[float]) -> float:
    value = 1.0
    for t in terms:
        value *= t
    return value


def simulate_max_sacc(
    n_slots: int, p_drop: float, pool: int, items: int, seed: int
) -> tuple[float, float]:
    """Order-statistics simulation for the drop-only error model.

    Returns (expected mean candidate SACC, expected mean per-item max SACC)
    estimated from seeded Monte Carlo draws of the per-slot drop process.
    """
    rng = random.Random(seed)
    pool_total = 0.0
    max_total = 0.0
    count = 0
    for _ in range(items):
        best = -1.0
        for _ in range(pool):
            errors = sum(1 for _ in range(n_slots) if rng.random() < p_drop)
            value = 1 - errors / n_slots
            pool_total += value
            count += 1
            if value > best:
                best = value
        max_total += best
    return pool_total / count, max_total / items
