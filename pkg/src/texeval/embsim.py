"""Skip-gram embeddings, word-similarity matrices and the EmbSim score.

Skip-gram with negative sampling, per (center c, context o, negatives k):

    loss = -log sigmoid(u_o . v_c) - sum_k log sigmoid(-u_k . v_c)

with ``v`` the input (word) vectors and ``u`` the output (context) vectors.
Training is plain SGD over all in-window pairs with the learning rate decayed
linearly to lr/100. Negatives come from the unigram distribution raised to
0.75. All random draws are made up front from one seeded stream, so the SGD
kernel itself is deterministic.

Words that never occur in the training corpus keep their initial vectors.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numba
import numpy as np

from ._rng import make_rng
from .corpus import Corpus
from .errors import ConfigError, DegenerateInputError, ParseError

EMBSIM_FLOOR = 1e-12
NEG_POWER = 0.75
LR_FLOOR_RATIO = 0.01


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 32
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    lr: float = 0.025
    seed: int = 1

    def __post_init__(self):
        for name in ("dim", "window", "negatives", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"skip-gram {name} must be >= 1")
        if not self.lr > 0:
            raise ConfigError("skip-gram learning rate must be positive")


@dataclass(eq=False)
class EmbeddingTable:
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    config: SkipGramConfig
    corpus_fingerprint: str = ""
    epoch_losses: list = field(default_factory=list)

    @property
    def size(self):
        return self.input_vectors.shape[0]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(asdict(self.config), sort_keys=True).encode())
        h.update(self.corpus_fingerprint.encode())
        h.update(np.ascontiguousarray(self.input_vectors, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


@dataclass(eq=False)
class SimilarityMatrix:
    values: np.ndarray
    source: str = ""

    @property
    def size(self):
        return self.values.shape[0]


def log_sigmoid(x):
    """Numerically stable ``log(sigmoid(x))``."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, -np.log1p(np.exp(-np.abs(x))), x - np.log1p(np.exp(-np.abs(x))))


def sgns_loss_grad(v_c, u_o, u_neg):
    """Loss and gradients for one training pair.

    Returns ``(loss, d_v_c, d_u_o, d_u_neg)`` where ``u_neg`` has one row per
    negative sample.
    """
    v_c = np.asarray(v_c, dtype=np.float64)
    u_o = np.asarray(u_o, dtype=np.float64)
    u_neg = np.atleast_2d(np.asarray(u_neg, dtype=np.float64))
    s_o = u_o @ v_c
    s_k = u_neg @ v_c
    loss = -log_sigmoid(s_o) - np.sum(log_sigmoid(-s_k))
    g_o = 1.0 / (1.0 + np.exp(-s_o)) - 1.0
    g_k = 1.0 / (1.0 + np.exp(-s_k))
    d_v = g_o * u_o + g_k @ u_neg
    d_u_o = g_o * v_c
    d_u_neg = g_k[:, None] * v_c[None, :]
    return float(loss), d_v, d_u_o, d_u_neg


@numba.njit(cache=True)
def _stable_log_sigmoid(x):
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@numba.njit(cache=True)
def _sgd_pairs(W_in, W_out, centers, contexts, negs, lrs):
    """In-place SGD over pairs; returns the summed loss before each update.

    All dot products of a pair use the pre-update vectors, so one step equals
    ``param -= lr * grad`` with gradients from :func:`sgns_loss_grad`.
    """
    D = W_in.shape[1]
    K = negs.shape[1]
    total = 0.0
    g_k = np.empty(K)
    d_v = np.empty(D)
    v = np.empty(D)
    for p in range(centers.shape[0]):
        c = centers[p]
        o = contexts[p]
        lr = lrs[p]
        for d in range(D):
            v[d] = W_in[c, d]
        s = 0.0
        for d in range(D):
            s += W_out[o, d] * v[d]
        loss = -_stable_log_sigmoid(s)
        g_o = 1.0 / (1.0 + math.exp(-s)) - 1.0
        for d in range(D):
            d_v[d] = g_o * W_out[o, d]
        for k in range(K):
            w = negs[p, k]
            s = 0.0
            for d in range(D):
                s += W_out[w, d] * v[d]
            loss -= _stable_log_sigmoid(-s)
            g_k[k] = 1.0 / (1.0 + math.exp(-s))
            for d in range(D):
                d_v[d] += g_k[k] * W_out[w, d]
        total += loss
        for d in range(D):
            W_out[o, d] -= lr * g_o * v[d]
        for k in range(K):
            w = negs[p, k]
            for d in range(D):
                W_out[w, d] -= lr * g_k[k] * v[d]
        for d in range(D):
            W_in[c, d] -= lr * d_v[d]
    return total


def sgd_step(W_in, W_out, center, context, negatives, lr):
    """Apply one pair update in place; returns the pair loss."""
    return _sgd_pairs(W_in, W_out, np.array([center], dtype=np.int64),
                      np.array([context], dtype=np.int64),
                      np.asarray(negatives, dtype=np.int64).reshape(1, -1),
                      np.array([lr], dtype=np.float64))


def _pairs(sentences, window):
    centers, contexts = [], []
    for s in sentences:
        L = len(s)
        for i in range(L):
            lo, hi = max(0, i - window), min(L, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(s[i])
                    contexts.append(s[j])
    return np.array(centers, dtype=np.int64), np.array(contexts, dtype=np.int64)


def negative_table(counts):
    """Cumulative sampling distribution proportional to ``counts ** 0.75``."""
    weights = np.asarray(counts, dtype=np.float64) ** NEG_POWER
    cdf = np.cumsum(weights)
    return cdf / cdf[-1]


def train_skipgram(corpus: Corpus, dim: int = 32, window: int = 5, negatives: int = 5,
                   epochs: int = 5, lr: float = 0.025, seed: int = 1,
                   config: SkipGramConfig | None = None) -> EmbeddingTable:
    """Train input/output vectors for every id of ``corpus.vocab``.

    Input vectors start uniform in ``[-0.5/dim, 0.5/dim)``, output vectors at
    zero. Sentences are visited in a fresh seeded order each epoch.
    """
    cfg = config or SkipGramConfig(dim, window, negatives, epochs, lr, seed)
    N = corpus.vocab.size
    seqs = [s for s in corpus.sequences if s]
    counts = np.bincount(np.fromiter((t for s in seqs for t in s), dtype=np.int64), minlength=N)
    if np.count_nonzero(counts) < 2:
        raise DegenerateInputError("skip-gram needs at least two distinct tokens")
    rng = make_rng(cfg.seed, "skipgram")
    W_in = (rng.random((N, cfg.dim)) - 0.5) / cfg.dim
    W_out = np.zeros((N, cfg.dim))
    cdf = negative_table(counts)

    pairs_per_epoch = sum(
        sum(min(len(s), i + cfg.window + 1) - max(0, i - cfg.window) - 1 for i in range(len(s)))
        for s in seqs
    )
    total_pairs = pairs_per_epoch * cfg.epochs
    losses = []
    done = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(len(seqs))
        centers, contexts = _pairs([seqs[i] for i in order], cfg.window)
        if centers.size == 0:
            losses.append(0.0)
            continue
        negs = np.searchsorted(cdf, rng.random((centers.size, cfg.negatives)), side="right")
        np.minimum(negs, N - 1, out=negs)
        progress = (done + np.arange(centers.size)) / max(total_pairs, 1)
        lrs = cfg.lr * (1.0 - (1.0 - LR_FLOOR_RATIO) * progress)
        loss = _sgd_pairs(W_in, W_out, centers, contexts, negs.astype(np.int64), lrs)
        losses.append(loss / centers.size)
        done += centers.size
    return EmbeddingTable(W_in, W_out, cfg, corpus.fingerprint(), losses)


def similarity_matrix(emb, dtype=np.float64) -> SimilarityMatrix:
    """Pairwise cosine of input vectors.

    Zero vectors get an all-zero row and column, including the diagonal.
    The result is exactly symmetric with entries in [-1, 1].
    """
    if isinstance(emb, EmbeddingTable):
        vectors, source = emb.input_vectors, emb.fingerprint()
    else:
        vectors, source = np.asarray(emb, dtype=np.float64), ""
    norms = np.sqrt(np.einsum("ij,ij->i", vectors, vectors))
    nonzero = norms > 0
    unit = np.zeros_like(vectors)
    unit[nonzero] = vectors[nonzero] / norms[nonzero, None]
    W = unit @ unit.T
    W = 0.5 * (W + W.T)
    np.clip(W, -1.0, 1.0, out=W)
    np.fill_diagonal(W, np.where(nonzero, 1.0, 0.0))
    return SimilarityMatrix(W.astype(dtype, copy=False), source)


def column_cosines(A, B) -> np.ndarray:
    """Cosine between matching columns; zero-norm columns give 0."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    dot = np.einsum("ij,ij->j", A, B)
    aa = np.einsum("ij,ij->j", A, A)
    bb = np.einsum("ij,ij->j", B, B)
    denom = np.sqrt(aa * bb)
    out = np.zeros_like(dot)
    ok = denom > 0
    out[ok] = dot[ok] / denom[ok]
    return np.clip(out, -1.0, 1.0)


def embsim(W_real, W_gen) -> float:
    """Log of the mean column cosine between two similarity matrices.

    The mean is floored at 1e-12 before the log, so the score lies in
    ``[log(1e-12), 0]``.
    """
    A = W_real.values if isinstance(W_real, SimilarityMatrix) else np.asarray(W_real)
    B = W_gen.values if isinstance(W_gen, SimilarityMatrix) else np.asarray(W_gen)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise ConfigError(f"similarity matrices must be square and equal in shape: {A.shape} vs {B.shape}")
    cos = column_cosines(A, B)
    mean = math.fsum(cos.tolist()) / cos.size
    return math.log(max(mean, EMBSIM_FLOOR))


def embsim_corpora(real: Corpus, generated: Corpus, config: SkipGramConfig = SkipGramConfig(),
                   dtype=np.float64) -> float:
    """Train the same skip-gram setup on both corpora and compare their W matrices."""
    if real.vocab != generated.vocab:
        raise ConfigError("EmbSim corpora must share one vocabulary")
    W = similarity_matrix(train_skipgram(real, config=config), dtype)
    W_gen = similarity_matrix(train_skipgram(generated, config=config), dtype)
    return embsim(W, W_gen)


_MAGIC = b"TXEMBED\0"
_VERSION = 1
_HEADER = "<qqqqqqqd"


def save_embeddings(emb: EmbeddingTable, path) -> None:
    """Binary layout: magic; int64 version, N, D, window, negatives, epochs, seed;
    float64 lr; then N input rows and N output rows as little-endian float64."""
    path = Path(path)
    c = emb.config
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack(_HEADER, _VERSION, emb.size, c.dim, c.window, c.negatives,
                             c.epochs, c.seed, c.lr))
        fh.write(np.ascontiguousarray(emb.input_vectors, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(emb.output_vectors, dtype="<f8").tobytes())
    sidecar = {"format": "texeval-embedding", "version": _VERSION, **asdict(c),
               "size": emb.size, "corpus_fingerprint": emb.corpus_fingerprint,
               "fingerprint": emb.fingerprint(), "vector": "input"}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_embeddings(path) -> EmbeddingTable:
    path = Path(path)
    data = path.read_bytes()
    if data[:len(_MAGIC)] != _MAGIC:
        raise ParseError("not a texeval embedding file", path)
    head = len(_MAGIC) + struct.calcsize(_HEADER)
    if len(data) < head:
        raise ParseError("truncated embedding file header", path)
    version, N, D, window, negs, epochs, seed, lr = struct.unpack(_HEADER, data[len(_MAGIC):head])
    if version != _VERSION:
        raise ParseError(f"unsupported embedding file version {version}", path)
    if len(data) != head + 2 * N * D * 8:
        raise ParseError("embedding file size does not match its header", path)
    arr = np.frombuffer(data, dtype="<f8", offset=head).astype(np.float64).reshape(2, N, D)
    cfg = SkipGramConfig(D, window, negs, epochs, lr, seed)
    corpus_fp = ""
    side = Path(str(path) + ".json")
    if side.exists():
        corpus_fp = json.loads(side.read_text()).get("corpus_fingerprint", "")
    return EmbeddingTable(arr[0].copy(), arr[1].copy(), cfg, corpus_fp)
