"""Randomly initialised LSTM used as the ground-truth language model.

Parameters are drawn i.i.d. from N(0, 1) as one flat stream in this order::

    embedding (V x E), W_i, W_f, W_o, W_g (each H x (E + H)),
    b_i, b_f, b_o, b_g (each H), W_out (V x H), b_out (V)

Gate weights act on ``concat(x_t, h_{t-1})``. Every sentence is conditioned
on the embedding of the START id at t = 1 with zero initial state.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import math

import numba
import numpy as np

from ._parallel import map_chunks
from ._rng import make_rng
from .corpus import START_ID, Corpus, Vocabulary
from .errors import ConfigError, ParseError, RangeError

DEFAULT_VOCAB = 5000
DEFAULT_EMBED = 32
DEFAULT_HIDDEN = 32
DEFAULT_LENGTH = 20
DEFAULT_SAMPLES = 10_000

_CHUNK = 512

GATES = ("input", "forget", "output", "candidate")
_MAGIC = b"TXORACLE"
_VERSION = 1


def _shapes(V, E, H):
    shapes = [("embedding", (V, E))]
    shapes += [(f"W_{g}", (H, E + H)) for g in GATES]
    shapes += [(f"b_{g}", (H,)) for g in GATES]
    shapes += [("W_out", (V, H)), ("b_out", (V,))]
    return shapes


@dataclass(frozen=True)
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden, batch=None):
        shape = (hidden,) if batch is None else (batch, hidden)
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass(frozen=True, eq=False)
class OracleModel:
    embedding: np.ndarray
    W_gates: np.ndarray  # (4, H, E + H) in GATES order
    b_gates: np.ndarray  # (4, H)
    W_out: np.ndarray
    b_out: np.ndarray
    seed: int | None = None
    init: str = "normal(0,1)"
    start_id: int = START_ID

    def __post_init__(self):
        V, E = self.embedding.shape
        H = self.W_out.shape[1]
        if (self.W_gates.shape != (4, H, E + H) or self.b_gates.shape != (4, H)
                or self.W_out.shape != (V, H) or self.b_out.shape != (V,)):
            raise ConfigError("inconsistent oracle parameter shapes")
        if not 0 <= self.start_id < V:
            raise ConfigError("start id outside the vocabulary")
        for arr in self.arrays():
            arr.setflags(write=False)

    @property
    def vocab_size(self):
        return self.embedding.shape[0]

    @property
    def embed_dim(self):
        return self.embedding.shape[1]

    @property
    def hidden_dim(self):
        return self.W_out.shape[1]

    def arrays(self):
        return [self.embedding, *self.W_gates, *self.b_gates, self.W_out, self.b_out]

    def flat_parameters(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def checksum(self) -> str:
        data = np.ascontiguousarray(self.flat_parameters(), dtype="<f8").tobytes()
        return hashlib.sha256(data).hexdigest()

    def fingerprint(self) -> str:
        meta = f"{self.vocab_size},{self.embed_dim},{self.hidden_dim},{self.seed},{self.start_id}"
        return hashlib.sha256((meta + self.checksum()).encode()).hexdigest()[:16]

    def describe(self) -> dict:
        return {
            "kind": "lstm-oracle",
            "vocab_size": self.vocab_size,
            "embed_dim": self.embed_dim,
            "hidden_dim": self.hidden_dim,
            "seed": self.seed,
            "init": self.init,
            "start_conditioning": "START embedding, zero state",
            "fingerprint": self.fingerprint(),
        }

    @classmethod
    def from_flat(cls, flat, V, E, H, **kw):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.ndim != 1 or flat.size != parameter_count(V, E, H):
            raise ConfigError("parameter vector length does not match (V, E, H)")
        parts = {}
        pos = 0
        for name, shape in _shapes(V, E, H):
            size = int(np.prod(shape))
            parts[name] = flat[pos:pos + size].reshape(shape).copy()
            pos += size
        return cls(
            embedding=parts["embedding"],
            W_gates=np.stack([parts[f"W_{g}"] for g in GATES]),
            b_gates=np.stack([parts[f"b_{g}"] for g in GATES]),
            W_out=parts["W_out"],
            b_out=parts["b_out"],
            **kw,
        )

    def scaled(self, factor) -> "OracleModel":
        return OracleModel.from_flat(self.flat_parameters() * factor, self.vocab_size,
                                     self.embed_dim, self.hidden_dim, seed=self.seed,
                                     init=f"{self.init}*{factor}", start_id=self.start_id)


def parameter_count(V, E, H) -> int:
    return sum(int(np.prod(shape)) for _, shape in _shapes(V, E, H))


def init_oracle(seed: int, V: int = DEFAULT_VOCAB, E: int = DEFAULT_EMBED,
                H: int = DEFAULT_HIDDEN) -> OracleModel:
    if V < 1 or E < 1 or H < 1:
        raise ConfigError(f"oracle dimensions must be positive, got V={V} E={E} H={H}")
    flat = make_rng(seed, "oracle-params").standard_normal(parameter_count(V, E, H))
    return OracleModel.from_flat(flat, V, E, H, seed=int(seed))


def zero_oracle(V: int, E: int = 1, H: int = 1) -> OracleModel:
    return OracleModel.from_flat(np.zeros(parameter_count(V, E, H)), V, E, H, init="zeros")


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _cell(model, x, h, c):
    """One LSTM update for a batch. ``x``: (B, E); ``h``, ``c``: (B, H)."""
    xh = np.concatenate([x, h], axis=-1)
    z = np.einsum("bk,ghk->gbh", xh, model.W_gates) + model.b_gates[:, None, :]
    i = _sigmoid(z[0])
    f = _sigmoid(z[1])
    o = _sigmoid(z[2])
    g = np.tanh(z[3])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def _logits(model, h):
    return h @ model.W_out.T + model.b_out


def log_softmax(logits):
    """Row-wise log-softmax with max shift."""
    logits = np.asarray(logits, dtype=np.float64)
    shift = logits.max(axis=-1, keepdims=True)
    z = logits - shift
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


@numba.njit(cache=True)
def _gather_log_softmax(logits, targets):
    """``log_softmax(logits)[b, targets[b]]`` for every row, max-shifted."""
    B, V = logits.shape
    out = np.empty(B)
    for b in range(B):
        m = logits[b, 0]
        for k in range(1, V):
            if logits[b, k] > m:
                m = logits[b, k]
        s = 0.0
        for k in range(V):
            s += math.exp(logits[b, k] - m)
        out[b] = logits[b, targets[b]] - m - math.log(s)
    return out


@numba.njit(cache=True)
def _inverse_cdf_rows(logits, u):
    """Per row, the first token whose cumulative softmax mass exceeds ``u[b]``."""
    B, V = logits.shape
    out = np.empty(B, dtype=np.int64)
    e = np.empty(V)
    for b in range(B):
        m = logits[b, 0]
        for k in range(1, V):
            if logits[b, k] > m:
                m = logits[b, k]
        s = 0.0
        for k in range(V):
            e[k] = math.exp(logits[b, k] - m)
            s += e[k]
        target = u[b] * s
        acc = 0.0
        tok = V - 1
        for k in range(V):
            acc += e[k]
            if acc > target:
                tok = k
                break
        out[b] = tok
    return out


def _check_token(model, token):
    if not 0 <= int(token) < model.vocab_size:
        raise RangeError(f"token id {token} outside [0, {model.vocab_size})")


def step(model: OracleModel, state: LstmState, token: int) -> tuple[LstmState, np.ndarray]:
    """Feed one token; return the new state and next-token logits."""
    _check_token(model, token)
    if state.h.shape != (model.hidden_dim,) or state.c.shape != (model.hidden_dim,):
        raise ConfigError("state dimensions do not match the oracle hidden size")
    x = model.embedding[int(token)][None, :]
    h, c = _cell(model, x, state.h[None, :], state.c[None, :])
    return LstmState(h[0], c[0]), _logits(model, h)[0]


def initial(model: OracleModel) -> tuple[LstmState, np.ndarray]:
    """State and logits after consuming the START marker."""
    return step(model, LstmState.zeros(model.hidden_dim), model.start_id)


def next_token_log_probs(model: OracleModel, prefix) -> np.ndarray:
    state, logits = initial(model)
    for tok in prefix:
        state, logits = step(model, state, tok)
    return log_softmax(logits)


def _score_block(model, block):
    """Per-token log-probs for an equal-length block of sentences (B, T)."""
    B, T = block.shape
    H = model.hidden_dim
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    x = np.broadcast_to(model.embedding[model.start_id], (B, model.embed_dim))
    out = np.empty((B, T))
    for t in range(T):
        h, c = _cell(model, x, h, c)
        out[:, t] = _gather_log_softmax(_logits(model, h), block[:, t])
        x = model.embedding[block[:, t]]
    return out


def _as_id_lists(sentences):
    if isinstance(sentences, Corpus):
        return list(sentences.sequences)
    return [tuple(int(i) for i in s) for s in sentences]


def log_prob_batch(model: OracleModel, sentences) -> list[np.ndarray]:
    """Per-token natural-log probabilities for each sentence.

    Sentences are grouped by length and scored in fixed-size chunks; the
    chunking never depends on the thread count.
    """
    seqs = _as_id_lists(sentences)
    V = model.vocab_size
    for s in seqs:
        for tok in s:
            if not 0 <= tok < V:
                raise RangeError(f"token id {tok} outside [0, {V})")
    result: list = [None] * len(seqs)
    by_len: dict = {}
    for k, s in enumerate(seqs):
        by_len.setdefault(len(s), []).append(k)
    for T, idx in sorted(by_len.items()):
        if T == 0:
            for k in idx:
                result[k] = np.zeros(0)
            continue
        block = np.array([seqs[k] for k in idx], dtype=np.int64)
        parts = map_chunks(lambda lo, hi: _score_block(model, block[lo:hi]), len(idx), _CHUNK)
        scores = np.concatenate(parts, axis=0)
        for row, k in enumerate(idx):
            result[k] = scores[row]
    return result


def log_prob(model: OracleModel, sentence) -> tuple[float, list[float]]:
    """Total and per-token log-probability of one sentence (no END term)."""
    per_token = log_prob_batch(model, [sentence])[0]
    return float(np.sum(per_token)), per_token.tolist()


def _sample_block(model, uniforms):
    B, T = uniforms.shape
    H = model.hidden_dim
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    x = np.broadcast_to(model.embedding[model.start_id], (B, model.embed_dim))
    out = np.empty((B, T), dtype=np.int64)
    for t in range(T):
        h, c = _cell(model, x, h, c)
        tok = _inverse_cdf_rows(_logits(model, h), np.ascontiguousarray(uniforms[:, t]))
        out[:, t] = tok
        x = model.embedding[tok]
    return out


def sample_array(model: OracleModel, count: int, length: int, seed: int) -> np.ndarray:
    if count < 1 or length < 1:
        raise ConfigError("count and length must be >= 1")
    # one uniform per emitted token, drawn up front so chunking cannot change the stream
    uniforms = make_rng(seed, "oracle-sample").random((count, length))
    parts = map_chunks(lambda lo, hi: _sample_block(model, uniforms[lo:hi]), count, _CHUNK)
    return np.concatenate(parts, axis=0)


def sample(model: OracleModel, count: int = DEFAULT_SAMPLES, length: int = DEFAULT_LENGTH,
           seed: int = 0, vocab: Vocabulary | None = None) -> Corpus:
    """Ancestral sampling of fixed-length sentences (no END marker)."""
    vocab = vocab or Vocabulary.synthetic(max(2, model.vocab_size))
    if vocab.size != model.vocab_size:
        raise ConfigError("vocabulary size differs from the oracle vocabulary size")
    arr = sample_array(model, count, length, seed)
    return Corpus(tuple(map(tuple, arr.tolist())), vocab, split="oracle",
                  fixed_length=True, source=f"oracle:{model.fingerprint()}:seed={seed}")


def save_oracle(model: OracleModel, path) -> None:
    """Write the little-endian binary parameter file and a JSON sidecar."""
    path = Path(path)
    seed = -1 if model.seed is None else int(model.seed)
    header = _MAGIC + struct.pack("<qqqqq", _VERSION, model.vocab_size, model.embed_dim,
                                  model.hidden_dim, seed)
    with path.open("wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(model.flat_parameters(), dtype="<f8").tobytes())
    sidecar = {
        "format": "texeval-oracle",
        "version": _VERSION,
        "layout": [name for name, _ in _shapes(1, 1, 1)],
        **model.describe(),
        "sha256": model.checksum(),
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_oracle(path) -> OracleModel:
    path = Path(path)
    data = path.read_bytes()
    head = len(_MAGIC) + 5 * 8
    if len(data) < head or data[:len(_MAGIC)] != _MAGIC:
        raise ParseError("not a texeval oracle file", path)
    version, V, E, H, seed = struct.unpack("<qqqqq", data[len(_MAGIC):head])
    if version != _VERSION:
        raise ParseError(f"unsupported oracle file version {version}", path)
    n = parameter_count(V, E, H)
    if len(data) != head + 8 * n:
        raise ParseError("truncated or oversized oracle parameter block", path)
    flat = np.frombuffer(data, dtype="<f8", offset=head, count=n).astype(np.float64)
    return OracleModel.from_flat(flat, V, E, H, seed=None if seed < 0 else seed)
