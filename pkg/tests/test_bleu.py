import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_bleu, brute_corpus_bleu, brute_self_bleu
from texeval.bleu import (
    BleuConfig, bleu, brevity_penalty, closest_length, corpus_bleu, corpus_bleu_by_order,
    modified_precision, ngram_counts, self_bleu, self_bleu_by_order,
)
from texeval.corpus import Corpus, Vocabulary
from texeval.errors import ConfigError, MetricError

V10 = Vocabulary.synthetic(12)


def corpus(seqs, vocab=V10):
    return Corpus(tuple(tuple(s) for s in seqs), vocab)


def test_ngram_counts_bigrams():
    c = ngram_counts([1, 2, 1, 2], 2)
    assert c == {(1, 2): 2, (2, 1): 1}


def test_ngram_counts_too_short():
    assert ngram_counts([5], 2) == {}


def test_modified_precision_clipping_classic():
    the, cat, mat, on = 2, 3, 4, 5
    hyp = [the] * 7
    refs = [[the, cat, on, the, mat], [the, cat, on, mat]]
    assert modified_precision(hyp, refs, 1) == (2, 7)


def test_modified_precision_needs_refs():
    with pytest.raises(ConfigError):
        modified_precision([1], [], 1)


def test_closest_length_ties_go_short():
    assert closest_length([4, 6], 5) == 4
    assert closest_length([3, 9], 8) == 9


def test_brevity_penalty_values():
    assert brevity_penalty(5, 4) == 1.0
    assert brevity_penalty(4, 4) == 1.0
    assert brevity_penalty(2, 4) == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_identical_sentence_scores_one():
    s = [2, 3, 4, 5, 6]
    assert bleu(s, [s]) == 1.0


def test_disjoint_scores_zero():
    assert bleu([2, 3, 4, 5], [[6, 7, 8, 9]]) == 0.0


def test_epsilon_smoothing_is_positive_but_tiny():
    cfg = BleuConfig(smoothing="epsilon")
    v = bleu([2, 3, 4, 5], [[6, 7, 8, 9]], cfg)
    assert 0 < v < 1e-8
    assert v == pytest.approx(brute_bleu([2, 3, 4, 5], [[6, 7, 8, 9]], 4, "epsilon"), abs=1e-15)


def test_empty_hypothesis_warns_and_scores_zero():
    with pytest.warns(RuntimeWarning):
        assert bleu([], [[2, 3]]) == 0.0


def test_hand_value_bigram():
    # hyp 2 3 4, ref 2 3 5: p1 = 2/3, p2 = 1/2, c = r so BP = 1
    v = bleu([2, 3, 4], [[2, 3, 5]], BleuConfig(max_order=2))
    assert v == pytest.approx(math.sqrt(2 / 3 * 1 / 2), abs=1e-15)


@pytest.mark.parametrize("bad", [dict(max_order=0), dict(max_order=6), dict(smoothing="add1"),
                                 dict(epsilon=0.0)])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        BleuConfig(**bad)


def _random_case(rng):
    V = rng.randint(2, 10)
    sent = lambda: [rng.randrange(V) for _ in range(rng.randint(1, 8))]
    return sent(), [sent() for _ in range(rng.randint(1, 3))], rng.randint(1, 4)


def test_matches_brute_force_random():
    rng = random.Random(1234)
    for _ in range(300):
        hyp, refs, n = _random_case(rng)
        for smoothing in ("none", "epsilon"):
            got = bleu(hyp, refs, BleuConfig(max_order=n, smoothing=smoothing))
            assert abs(got - brute_bleu(hyp, refs, n, smoothing)) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.integers(2, 6), min_size=1, max_size=7), min_size=2, max_size=6),
       st.lists(st.lists(st.integers(2, 6), min_size=1, max_size=7), min_size=1, max_size=4),
       st.integers(1, 4))
def test_corpus_bleu_matches_brute_force(hyps, refs, n):
    cfg = BleuConfig(max_order=n)
    got = corpus_bleu(corpus(hyps), corpus(refs), cfg)
    assert abs(got - brute_corpus_bleu(hyps, refs, n)) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.integers(2, 5), min_size=1, max_size=7), min_size=2, max_size=7),
       st.integers(1, 4))
def test_self_bleu_matches_brute_force(sents, n):
    got = self_bleu(corpus(sents), BleuConfig(max_order=n))
    assert abs(got - brute_self_bleu(sents, n)) <= 1e-12


def test_corpus_bleu_by_order_consistent():
    rng = random.Random(5)
    hyps = [[rng.randrange(2, 8) for _ in range(6)] for _ in range(20)]
    refs = [[rng.randrange(2, 8) for _ in range(6)] for _ in range(15)]
    by = corpus_bleu_by_order(corpus(hyps), corpus(refs), BleuConfig(max_order=4), orders=(2, 3, 4))
    for n in (2, 3, 4):
        assert by[n] == pytest.approx(brute_corpus_bleu(hyps, refs, n), abs=1e-12)


def test_self_bleu_identical_corpus_is_one():
    assert self_bleu(corpus([[2, 3, 4, 5, 6]] * 50)) == 1.0


def test_self_bleu_disjoint_corpus_is_zero():
    vocab = Vocabulary.synthetic(2 + 50 * 4)
    sents = [[2 + 4 * k + j for j in range(4)] for k in range(50)]
    assert self_bleu(corpus(sents, vocab)) == 0.0


def test_self_bleu_needs_two_sentences():
    with pytest.raises(MetricError):
        self_bleu(corpus([[2, 3]]))


def test_self_bleu_unique_max_falls_back_to_runner_up():
    # "2 2 2" has the unique max count of unigram 2; the others only reach 1
    sents = [[2, 2, 2], [2, 3, 4], [4, 3, 2]]
    got = self_bleu(corpus(sents), BleuConfig(max_order=1))
    assert got == pytest.approx(brute_self_bleu(sents, 1), abs=1e-15)


def test_corpus_bleu_permutation_invariant():
    rng = random.Random(7)
    hyps = [[rng.randrange(2, 9) for _ in range(rng.randint(2, 7))] for _ in range(30)]
    refs = [[rng.randrange(2, 9) for _ in range(rng.randint(2, 7))] for _ in range(10)]
    cfg = BleuConfig(max_order=2)
    base = corpus_bleu(corpus(hyps), corpus(refs), cfg)
    rng.shuffle(hyps)
    rng.shuffle(refs)
    assert corpus_bleu(corpus(hyps), corpus(refs), cfg) == base


def test_self_bleu_permutation_invariant():
    rng = random.Random(8)
    sents = [[rng.randrange(2, 6) for _ in range(rng.randint(2, 6))] for _ in range(25)]
    base = self_bleu(corpus(sents), BleuConfig(max_order=3))
    rng.shuffle(sents)
    assert self_bleu(corpus(sents), BleuConfig(max_order=3)) == base


def test_adding_reference_never_lowers_clipped_count():
    rng = random.Random(9)
    for _ in range(100):
        hyp = [rng.randrange(2, 6) for _ in range(6)]
        refs = [[rng.randrange(2, 6) for _ in range(5)]]
        before = modified_precision(hyp, refs, 2)[0]
        after = modified_precision(hyp, refs + [[rng.randrange(2, 6) for _ in range(5)]], 2)[0]
        assert after >= before


def test_repetitive_corpus_scores_higher_self_bleu():
    rng = random.Random(10)
    base = [2, 3, 4, 5, 6, 7]
    repetitive = [base[:] for _ in range(20)]
    for s in repetitive[::2]:
        s[rng.randrange(6)] = rng.randrange(2, 12)
    diverse = [[rng.randrange(2, 12) for _ in range(6)] for _ in range(20)]
    cfg = BleuConfig(max_order=3)
    assert self_bleu(corpus(repetitive), cfg) > self_bleu(corpus(diverse), cfg)


def test_sampled_self_bleu_deterministic_and_subset():
    rng = random.Random(11)
    sents = [[rng.randrange(2, 8) for _ in range(5)] for _ in range(60)]
    c = corpus(sents)
    a = self_bleu_by_order(c, BleuConfig(max_order=2), sample_size=10, seed=3)
    b = self_bleu_by_order(c, BleuConfig(max_order=2), sample_size=10, seed=3)
    assert a == b
    assert self_bleu(c, sample_size=60) == self_bleu(c)


def test_vocab_mismatch_rejected():
    with pytest.raises(ConfigError):
        corpus_bleu(corpus([[2, 3]]), corpus([[2, 3]], Vocabulary.synthetic(20)))


def test_fingerprint_depends_on_config():
    assert BleuConfig().fingerprint() == BleuConfig().fingerprint()
    assert BleuConfig().fingerprint() != BleuConfig(max_order=3).fingerprint()
