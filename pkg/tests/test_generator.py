import itertools
import math
from collections import Counter

import numpy as np
import pytest

from texeval import generator as G
from texeval.corpus import Corpus, Vocabulary, build_vocab, encode
from texeval.errors import ConfigError, ParseError, TrainingError


def make(sentences, fixed=False):
    vocab = build_vocab(sentences)
    return Corpus(tuple(tuple(encode(vocab, s)) for s in sentences), vocab, fixed_length=fixed)


def test_unigram_hand_count():
    c = make([["a", "b", "a"], ["c"]])
    lm = G.train_ngram_mle(c, order=1, delta=1e-12)
    a, b, cc, end = (c.vocab.id(t) for t in ("a", "b", "c", "</s>"))
    # events: a b a </s> c </s>
    assert lm.prob(a) == pytest.approx(2 / 6, abs=1e-9)
    assert lm.prob(b) == pytest.approx(1 / 6, abs=1e-9)
    assert lm.prob(end) == pytest.approx(2 / 6, abs=1e-9)
    assert lm.prob(c.vocab.start_id) == pytest.approx(0.0, abs=1e-9)


def test_smoothing_formula_hand_value():
    c = make([["a", "b"]])
    lm = G.train_ngram_mle(c, order=2, delta=0.5)
    V = c.vocab.size  # 4
    a, b = c.vocab.id("a"), c.vocab.id("b")
    # context (a,) seen once, followed by b
    assert lm.prob(b, [a]) == (1 + 0.5) / (1 + 0.5 * V)
    assert lm.prob(a, [a]) == 0.5 / (1 + 0.5 * V)


def test_unseen_context_backs_off():
    c = make([["a", "b"], ["b", "b"]])
    lm = G.train_ngram_mle(c, order=3, delta=0.1)
    a = c.vocab.id("a")
    # (a, a) never seen, (a,) seen once followed by b
    assert lm.context_for([a, a]) == (a,)
    ctx_unseen = lm.context_for([c.vocab.end_id])
    assert ctx_unseen == ()


@pytest.mark.parametrize("order", [1, 2, 3])
def test_conditionals_normalise(order):
    c = make([["x", "y", "z", "x"], ["y", "y"], ["z"]])
    lm = G.train_ngram_mle(c, order=order, delta=0.01)
    for prefix in ([], [2], [2, 3], [4, 4, 4], [1]):
        p = np.exp(lm.next_token_log_probs(prefix))
        assert abs(math.fsum(p) - 1.0) < 1e-12
        assert p.min() > 0
        assert math.fsum(lm.prob(t, prefix) for t in range(lm.V)) == pytest.approx(1.0, abs=1e-12)


def test_bigram_chain_product():
    c = make([["a", "b"], ["a", "a"]])
    d = 0.25
    lm = G.train_ngram_mle(c, order=2, delta=d)
    V = c.vocab.size
    a, b, end = c.vocab.id("a"), c.vocab.id("b"), c.vocab.end_id
    # counts: (PAD)->a:2, (a)->b:1, (a)->a:1, (b)->end:1, (a)->end:1
    p_a = (2 + d) / (2 + d * V)
    p_b_given_a = (1 + d) / (3 + d * V)
    p_end_given_b = (1 + d) / (1 + d * V)
    expected = math.log(p_a) + math.log(p_b_given_a) + math.log(p_end_given_b)
    assert G.ngram_log_prob(lm, [a, b]) == pytest.approx(expected, abs=1e-12)
    assert sum(G.ngram_token_log_probs(lm, [a, b])) == pytest.approx(expected, abs=1e-12)


def test_fixed_length_distribution_sums_to_one():
    vocab = Vocabulary.synthetic(2)
    c = Corpus(((0, 1, 1), (1, 0, 1)), vocab, fixed_length=True)
    lm = G.train_ngram_mle(c, order=2, delta=0.3)
    total = math.fsum(math.exp(G.ngram_log_prob(lm, s)) for s in itertools.product(range(2), repeat=3))
    assert abs(total - 1.0) < 1e-12


def test_fingerprint_is_deterministic_and_content_sensitive():
    c = make([["a", "b"], ["b"]])
    f1 = G.train_ngram_mle(c, order=2).fingerprint()
    assert f1 == G.train_ngram_mle(c, order=2).fingerprint()
    assert f1 != G.train_ngram_mle(c, order=3).fingerprint()
    assert f1 != G.train_ngram_mle(c, order=2, delta=0.5).fingerprint()


def test_point_mass_sampling_reproduces_training_sentence():
    c = make([["the", "cat", "sat"]])
    lm = G.train_ngram_mle(c, order=3, delta=1e-12)
    out = G.ngram_sample(lm, 50, 10, seed=1)
    assert set(out.sequences) == set(c.sequences)


def test_unigram_samples_match_probabilities():
    from scipy.stats import chisquare
    vocab = Vocabulary.synthetic(5)
    c = Corpus(((2, 2, 2, 3, 3, 4),), vocab, fixed_length=True)
    lm = G.train_ngram_mle(c, order=1, delta=0.5)
    out = G.ngram_sample(lm, 20000, 5, seed=2)
    counts = np.bincount(np.array(out.sequences).ravel(), minlength=5)
    probs = np.array([lm.prob(t) for t in range(5)])
    assert chisquare(counts, probs * counts.sum()).pvalue > 1e-3


def test_sampling_deterministic_and_seed_sensitive():
    c = make([["a", "b", "c"], ["c", "b"], ["a", "a"]])
    lm = G.train_ngram_mle(c, order=2)
    assert G.ngram_sample(lm, 40, 6, seed=3) == G.ngram_sample(lm, 40, 6, seed=3)
    assert G.ngram_sample(lm, 40, 6, seed=3) != G.ngram_sample(lm, 40, 6, seed=4)


def test_variable_length_samples_stop_before_end():
    c = make([["a", "b"], ["b"]])
    lm = G.train_ngram_mle(c, order=2)
    out = G.ngram_sample(lm, 200, 8, seed=0)
    assert all(c.vocab.end_id not in s and len(s) <= 8 for s in out.sequences)


def test_mle_beats_uniform_on_training_data():
    c = make([["a", "man", "rides", "a", "bike"], ["a", "dog", "rides", "a", "bike"]] * 5)
    lm = G.train_ngram_mle(c, order=3)
    uni = G.UniformGenerator(c.vocab)
    for s in c.sequences:
        assert G.ngram_log_prob(lm, s) > uni.sentence_log_prob(s)


def test_uniform_generator_log_prob():
    vocab = Vocabulary.synthetic(10)
    uni = G.UniformGenerator(vocab)
    assert uni.sentence_log_prob([2, 3, 4], fixed_length=True) == pytest.approx(-3 * math.log(10))
    assert uni.sentence_log_prob([2, 3, 4], fixed_length=False) == pytest.approx(-4 * math.log(10))


def test_repeat_generator_emits_one_sentence():
    vocab = Vocabulary.synthetic(10)
    rep = G.RepeatGenerator(vocab, [4, 5, 6])
    out = rep.sample(5, 10, seed=0)
    assert out.sequences == ((4, 5, 6),) * 5


def test_bad_training_arguments():
    c = make([["a"]])
    with pytest.raises(ConfigError):
        G.train_ngram_mle(c, order=0)
    with pytest.raises(ConfigError):
        G.train_ngram_mle(c, delta=0.0)
    with pytest.raises(TrainingError):
        G.train_ngram_mle(Corpus((), c.vocab))


def test_model_file_roundtrip(tmp_path):
    c = make([["a", "b", "c"], ["c", "a"]])
    lm = G.train_ngram_mle(c, order=3, delta=0.2)
    p = tmp_path / "m.ngram"
    G.save_ngram(lm, p)
    back = G.load_ngram(p, c.vocab)
    assert back.fingerprint() == lm.fingerprint()
    s = c.sequences[0]
    assert G.ngram_log_prob(back, s) == G.ngram_log_prob(lm, s)


def test_model_file_rejects_trailing_bytes(tmp_path):
    c = make([["a", "b"]])
    p = tmp_path / "m.ngram"
    G.save_ngram(G.train_ngram_mle(c, order=2), p)
    p.write_bytes(p.read_bytes() + b"\0")
    with pytest.raises(ParseError):
        G.load_ngram(p)


def test_logprob_file_roundtrip(tmp_path):
    rows = [[-0.5, -1.25], [], [-3.0]]
    p = tmp_path / "lp.txt"
    G.write_logprob_file(rows, p)
    assert G.read_logprob_file(p) == rows


def test_logprob_file_rejects_text(tmp_path):
    p = tmp_path / "lp.txt"
    p.write_text("-1.0\nfoo\n")
    with pytest.raises(ParseError) as exc:
        G.read_logprob_file(p)
    assert exc.value.line == 2


def test_counts_are_consistent_across_orders():
    c = make([["a", "b", "a"], ["b", "a"]])
    lm = G.train_ngram_mle(c, order=3)
    unigram_total = sum(lm.tables[0][()].values())
    bigram_total = sum(sum(cnt.values()) for cnt in lm.tables[1].values())
    assert unigram_total == bigram_total == sum(len(s) + 1 for s in c.sequences)
    assert Counter(lm.tables[0][()]) == Counter(
        [t for s in c.sequences for t in s] + [c.vocab.end_id] * len(c))
