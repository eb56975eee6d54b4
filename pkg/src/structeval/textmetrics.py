"""N-gram baselines: sentence-level BLEU-4 and ROUGE-N F1."""
from __future__ import annotations

import math
import re
from collections import Counter

# Alphanumeric runs, else any single non-space character (underscore included).
_TOKEN_RE = re.compile(r"[^\W_]+|\S")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(reference: str, hypothesis: str, max_n: int = 4) -> float:
    """Sentence BLEU with uniform weights and brevity penalty.

    Orders above 1 use add-one smoothing on matches and totals, so a short
    but correct hypothesis is not zeroed by a missing 4-gram.
    """
    ref, hyp = tokenize(reference), tokenize(hypothesis)
    if not hyp:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        hyp_counts = ngrams(hyp, n)
        ref_counts = ngrams(ref, n)
        matches = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        total = sum(hyp_counts.values())
        if n > 1:
            matches, total = matches + 1, total + 1
        if matches == 0:
            return 0.0
        log_sum += math.log(matches / total)
    c, r = len(hyp), len(ref)
    bp = 1.0 if c > r else math.exp(1 - r / c)
    return min(1.0, bp * math.exp(log_sum / max_n))


def rouge_n(reference: str, hypothesis: str, n: int = 1) -> float:
    """F1 of clipped n-gram overlap."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    ref_counts = ngrams(tokenize(reference), n)
    hyp_counts = ngrams(tokenize(hypothesis), n)
    if not ref_counts or not hyp_counts:
        return 0.0
    overlap = sum((ref_counts & hyp_counts).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(hyp_counts.values())
    recall = overlap / sum(ref_counts.values())
    return 2 * precision * recall / (precision + recall)
