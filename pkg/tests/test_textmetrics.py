import math
import random

import pytest

from structeval.textmetrics import bleu, ngrams, rouge_n, tokenize


def test_tokenize():
    assert tokenize('{"user": ["Alice"]}') == ["{", '"', "user", '"', ":", "[", '"', "Alice", '"', "]", "}"]
    assert tokenize("a_b  c3") == ["a", "_", "b", "c3"]
    assert tokenize("") == []


def test_bleu_identity_and_disjoint():
    s = "the quick brown fox jumps over the lazy dog"
    assert bleu(s, s) == pytest.approx(1.0)
    assert bleu("a b c d", "w x y z") < 0.05
    assert bleu("a b c", "") == 0.0


def test_bleu_hand_computed():
    # ref "a b c d e", hyp "a b c d":
    # p1 = 4/4; p2 = (3+1)/(3+1); p3 = (2+1)/(2+1); p4 = (1+1)/(1+1)
    # brevity penalty exp(1 - 5/4); geometric mean of precisions is 1
    expected = math.exp(1 - 5 / 4)
    assert bleu("a b c d e", "a b c d") == pytest.approx(expected, abs=1e-15)
    assert bleu("a b c d e", "a b c d") == pytest.approx(0.7788007830714049, abs=1e-15)


def test_bleu_smoothing_partial_match():
    # ref "a b c d", hyp "a b x y": p1 = 2/4, p2 = (1+1)/(3+1), p3 = 1/3, p4 = 1/2
    expected = math.exp((math.log(0.5) + math.log(0.5) + math.log(1 / 3) + math.log(0.5)) / 4)
    assert bleu("a b c d", "a b x y") == pytest.approx(expected)


def test_rouge_examples():
    assert rouge_n("a b c", "a b c", 1) == 1.0
    assert rouge_n("a b c", "a b c", 2) == 1.0
    assert rouge_n("a b c", "x y z", 1) == 0.0
    assert rouge_n("a b c", "a b d", 2) == 0.5
    assert rouge_n("a", "a", 2) == 0.0  # neither side has a bigram
    with pytest.raises(ValueError):
        rouge_n("a", "a", 3)


def test_rouge_clipped_counts():
    # hyp repeats "a" three times, ref has it once: clipped overlap 1
    p, r = 1 / 3, 1 / 1
    assert rouge_n("a", "a a a", 1) == pytest.approx(2 * p * r / (p + r))


def test_ranges_and_symmetry():
    rng = random.Random(2)
    vocab = list("abcdefg")
    for _ in range(300):
        x = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 8)))
        y = " ".join(rng.choice(vocab) for _ in range(len(x.split())))
        for v in (bleu(x, y), rouge_n(x, y, 1), rouge_n(x, y, 2)):
            assert 0.0 <= v <= 1.0
        assert rouge_n(x, y, 1) == pytest.approx(rouge_n(y, x, 1))
        if x:
            assert bleu(x, x) == pytest.approx(1.0)


def test_ngrams():
    assert ngrams(["a", "b", "a", "b"], 2) == {("a", "b"): 2, ("b", "a"): 1}
