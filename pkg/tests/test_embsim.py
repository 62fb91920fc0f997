import math

import numpy as np
import pytest

from texeval import embsim as E
from texeval.corpus import Corpus, Vocabulary
from texeval.errors import ConfigError, DegenerateInputError, ParseError


def loss_only(v_c, u_o, u_neg):
    """Loss straight from the definition, with plain math.exp."""
    sig = lambda x: 1.0 / (1.0 + math.exp(-x))
    out = -math.log(sig(float(u_o @ v_c)))
    for u in u_neg:
        out -= math.log(sig(-float(u @ v_c)))
    return out


def rel_err(a, b):
    return np.abs(a - b).max() / max(np.abs(a).max(), np.abs(b).max(), 1e-8)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(100):
        D, K = rng.integers(2, 9), rng.integers(1, 6)
        params = [rng.normal(0, 0.7, D), rng.normal(0, 0.7, D), rng.normal(0, 0.7, (K, D))]
        loss, *grads = E.sgns_loss_grad(*params)
        assert loss == pytest.approx(loss_only(*params), rel=1e-12)
        for which, grad in enumerate(grads):
            numeric = np.zeros_like(params[which])
            for idx in np.ndindex(params[which].shape):
                plus = [p.copy() for p in params]
                minus = [p.copy() for p in params]
                plus[which][idx] += h
                minus[which][idx] -= h
                numeric[idx] = (loss_only(*plus) - loss_only(*minus)) / (2 * h)
            assert rel_err(grad, numeric) < 1e-4


def test_log_sigmoid_is_stable():
    x = np.array([-800.0, -30.0, 0.0, 30.0, 800.0])
    out = E.log_sigmoid(x)
    assert np.all(np.isfinite(out))
    assert out[0] == -800.0 and out[2] == pytest.approx(-math.log(2))


def test_kernel_step_equals_gradient_step():
    rng = np.random.default_rng(1)
    W_in = rng.normal(0, 0.3, (6, 4))
    W_out = rng.normal(0, 0.3, (6, 4))
    c, o, negs, lr = 2, 4, [1, 3, 5], 0.05
    loss, d_v, d_uo, d_un = E.sgns_loss_grad(W_in[c], W_out[o], W_out[negs])
    exp_in, exp_out = W_in.copy(), W_out.copy()
    exp_in[c] -= lr * d_v
    exp_out[o] -= lr * d_uo
    for k, w in enumerate(negs):
        exp_out[w] -= lr * d_un[k]
    got = E.sgd_step(W_in, W_out, c, o, negs, lr)
    assert got == pytest.approx(loss, abs=1e-12)
    assert np.allclose(W_in, exp_in, atol=1e-14, rtol=0)
    assert np.allclose(W_out, exp_out, atol=1e-14, rtol=0)


def topical_corpus(n=400, seed=0):
    """Two topics: {2,3} co-occur, {4,5} co-occur, never across."""
    rng = np.random.default_rng(seed)
    seqs = []
    for _ in range(n):
        pool = (2, 3) if rng.random() < 0.5 else (4, 5)
        seqs.append(tuple(int(rng.choice(pool)) for _ in range(6)))
    return Corpus(tuple(seqs), Vocabulary.synthetic(6))


def test_training_is_deterministic():
    c = topical_corpus(100)
    a = E.train_skipgram(c, dim=8, epochs=2, seed=3)
    b = E.train_skipgram(c, dim=8, epochs=2, seed=3)
    assert np.array_equal(a.input_vectors, b.input_vectors)
    assert a.fingerprint() == b.fingerprint()
    assert not np.array_equal(a.input_vectors, E.train_skipgram(c, dim=8, epochs=2, seed=4).input_vectors)


def test_cooccurring_words_are_closer():
    emb = E.train_skipgram(topical_corpus(), dim=10, window=2, epochs=5, seed=2)
    W = E.similarity_matrix(emb).values
    assert W[2, 3] > W[2, 4] and W[4, 5] > W[3, 5]


def test_loss_decreases():
    emb = E.train_skipgram(topical_corpus(), dim=10, epochs=4, seed=2)
    assert emb.epoch_losses[-1] < emb.epoch_losses[0]


def test_degenerate_corpus_rejected():
    with pytest.raises(DegenerateInputError):
        E.train_skipgram(Corpus(((2, 2, 2),), Vocabulary.synthetic(4)))


def test_unused_ids_keep_initial_range():
    emb = E.train_skipgram(topical_corpus(50), dim=4, epochs=1)
    # ids 0 and 1 never occur and are never drawn as negatives
    assert np.all(np.abs(emb.input_vectors[:2]) <= 0.5 / 4)
    assert np.all(emb.output_vectors[:2] == 0)


def test_negative_table_power():
    cdf = E.negative_table([16, 0, 1])
    weights = np.diff(np.concatenate([[0], cdf]))
    assert weights == pytest.approx(np.array([8, 0, 1]) / 9)


def test_similarity_matrix_properties():
    rng = np.random.default_rng(4)
    vecs = rng.normal(size=(7, 3))
    vecs[5] = 0.0
    W = E.similarity_matrix(vecs).values
    assert np.array_equal(W, W.T)
    assert np.all(W <= 1) and np.all(W >= -1)
    assert np.all(W[5] == 0) and np.all(W[:, 5] == 0)
    assert all(W[i, i] == 1.0 for i in range(7) if i != 5)


def test_similarity_hand_values():
    vecs = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, -2.0]])
    W = E.similarity_matrix(vecs).values
    assert W[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert W[0, 2] == pytest.approx(0.0, abs=1e-15)
    assert W[1, 2] == pytest.approx(-1 / math.sqrt(2), abs=1e-15)


def test_embsim_self_is_exactly_zero():
    rng = np.random.default_rng(5)
    W = E.similarity_matrix(rng.normal(size=(30, 5))).values
    assert E.embsim(W, W) == 0.0


def test_embsim_orthogonal_hits_floor():
    A = np.eye(3)
    B = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
    assert E.embsim(A, B) == math.log(1e-12)


def test_embsim_hand_value():
    A = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.0]])
    B = np.array([[1.0, 0.1, 0.3], [0.1, 1.0, 0.0], [0.3, 0.0, 1.0]])
    cols = []
    for j in range(3):
        a, b = A[:, j], B[:, j]
        cols.append(sum(x * y for x, y in zip(a, b))
                    / math.sqrt(sum(x * x for x in a) * sum(y * y for y in b)))
    expected = math.log(sum(cols) / 3)
    assert E.embsim(A, B) == pytest.approx(expected, abs=1e-14)
    assert E.embsim(B, A) == pytest.approx(expected, abs=1e-14)
    assert E.embsim(3 * A, B) == pytest.approx(expected, abs=1e-14)


def test_embsim_shape_mismatch():
    with pytest.raises(ConfigError):
        E.embsim(np.eye(3), np.eye(4))


def test_retraining_same_corpus_gives_zero():
    c = topical_corpus(100)
    cfg = E.SkipGramConfig(dim=6, epochs=2, seed=9)
    assert abs(E.embsim_corpora(c, c, cfg)) <= 1e-9


def test_float32_matrix_close_to_float64():
    emb = E.train_skipgram(topical_corpus(100), dim=6, epochs=1)
    W64 = E.similarity_matrix(emb).values
    W32 = E.similarity_matrix(emb, np.float32).values
    assert W32.dtype == np.float32 and np.allclose(W32, W64, atol=1e-6)


def test_bad_config():
    with pytest.raises(ConfigError):
        E.SkipGramConfig(dim=0)
    with pytest.raises(ConfigError):
        E.SkipGramConfig(lr=0.0)


def test_save_load_roundtrip(tmp_path):
    emb = E.train_skipgram(topical_corpus(60), dim=5, epochs=1, seed=4)
    p = tmp_path / "emb.bin"
    E.save_embeddings(emb, p)
    back = E.load_embeddings(p)
    assert np.array_equal(back.input_vectors, emb.input_vectors)
    assert np.array_equal(back.output_vectors, emb.output_vectors)
    assert back.config == emb.config and back.fingerprint() == emb.fingerprint()


def test_load_rejects_bad_file(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"TXEMBED\0" + b"\0" * 10)
    with pytest.raises(ParseError):
        E.load_embeddings(p)
    p.write_bytes(b"nope")
    with pytest.raises(ParseError):
        E.load_embeddings(p)
