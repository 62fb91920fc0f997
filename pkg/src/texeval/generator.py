"""Autoregressive generators: the scoring/sampling contract and an n-gram MLE model.

Every generator exposes ``next_token_log_probs(prefix)`` over the whole
vocabulary, ``sentence_log_prob(sentence, fixed_length)`` and
``sample(count, max_length, seed)``. Fixed-length scoring omits the END
transition; variable-length scoring includes it.
"""

from __future__ import annotations

import bisect
import hashlib
import json
import math
import struct
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from . import oracle as _oracle
from ._rng import make_rng
from .corpus import Corpus, Vocabulary
from .errors import ConfigError, ParseError, RangeError, TrainingError

PAD = -1  # context padding; never a vocabulary id

DEFAULT_DELTA = 0.01
DEFAULT_BACKOFF = 0.4


@runtime_checkable
class Generator(Protocol):
    vocab: Vocabulary

    def next_token_log_probs(self, prefix: Sequence[int]) -> np.ndarray: ...

    def sentence_log_prob(self, sentence: Sequence[int], fixed_length: bool) -> float: ...

    def sample(self, count: int, max_length: int, seed: int, fixed_length: bool) -> Corpus: ...

    def fingerprint(self) -> str: ...


def _check_ids(sentence, V):
    for tok in sentence:
        if not 0 <= tok < V:
            raise RangeError(f"token id {tok} outside [0, {V})")


class UniformGenerator:
    """Every token, END included, has probability 1/V at every step."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab

    def next_token_log_probs(self, prefix=()):
        V = self.vocab.size
        return np.full(V, -math.log(V))

    def sentence_log_prob(self, sentence, fixed_length=False):
        _check_ids(sentence, self.vocab.size)
        steps = len(sentence) + (0 if fixed_length else 1)
        return -steps * math.log(self.vocab.size)

    def sample(self, count, max_length, seed, fixed_length=False):
        if count < 1 or max_length < 1:
            raise ConfigError("count and max_length must be >= 1")
        rng = make_rng(seed, "uniform-sample")
        V = self.vocab.size
        draws = rng.integers(0, V, size=(count, max_length))
        seqs = []
        for row in draws.tolist():
            if not fixed_length and self.vocab.end_id in row:
                row = row[:row.index(self.vocab.end_id)]
            seqs.append(tuple(row))
        return Corpus(tuple(seqs), self.vocab, split="generated", fixed_length=fixed_length,
                      source=f"uniform:seed={seed}")

    def fingerprint(self):
        return hashlib.sha256(f"uniform:{self.vocab.fingerprint()}".encode()).hexdigest()[:16]

    def describe(self):
        return {"kind": "uniform", "vocab_size": self.vocab.size, "fingerprint": self.fingerprint()}


class RepeatGenerator:
    """Degenerate generator that always emits one fixed sentence."""

    def __init__(self, vocab: Vocabulary, sentence: Sequence[int]):
        _check_ids(sentence, vocab.size)
        self.vocab = vocab
        self.sentence = tuple(int(t) for t in sentence)

    def next_token_log_probs(self, prefix=()):
        prefix = tuple(prefix)
        out = np.full(self.vocab.size, -np.inf)
        if prefix == self.sentence[:len(prefix)]:
            nxt = self.sentence[len(prefix)] if len(prefix) < len(self.sentence) else self.vocab.end_id
            out[nxt] = 0.0
        else:
            out[:] = -math.log(self.vocab.size)
        return out

    def sentence_log_prob(self, sentence, fixed_length=False):
        return 0.0 if tuple(sentence) == self.sentence else -math.inf

    def sample(self, count, max_length, seed, fixed_length=False):
        if count < 1:
            raise ConfigError("count must be >= 1")
        s = self.sentence[:max_length]
        return Corpus((s,) * count, self.vocab, split="generated", fixed_length=fixed_length,
                      source="repeat")

    def fingerprint(self):
        raw = f"repeat:{self.vocab.fingerprint()}:{self.sentence}"
        return hashlib.sha256(raw.encode()).hexdigest()[:16]

    def describe(self):
        return {"kind": "repeat", "length": len(self.sentence), "fingerprint": self.fingerprint()}


class OracleGenerator:
    """Adapter giving an :class:`~texeval.oracle.OracleModel` the generator contract."""

    def __init__(self, model: _oracle.OracleModel, vocab: Vocabulary | None = None):
        self.model = model
        self.vocab = vocab or Vocabulary.synthetic(max(2, model.vocab_size))
        if self.vocab.size != model.vocab_size:
            raise ConfigError("vocabulary size differs from the oracle vocabulary size")

    def next_token_log_probs(self, prefix=()):
        return _oracle.next_token_log_probs(self.model, prefix)

    def sentence_log_prob(self, sentence, fixed_length=True):
        if not fixed_length:
            raise ConfigError("the oracle only scores fixed-length sentences")
        return _oracle.log_prob(self.model, sentence)[0]

    def sentence_log_probs(self, sentences, fixed_length=True):
        if not fixed_length:
            raise ConfigError("the oracle only scores fixed-length sentences")
        return [float(np.sum(x)) for x in _oracle.log_prob_batch(self.model, sentences)]

    def sample(self, count, max_length, seed, fixed_length=True):
        return _oracle.sample(self.model, count, max_length, seed, vocab=self.vocab)

    def fingerprint(self):
        return self.model.fingerprint()

    def describe(self):
        return self.model.describe()


@dataclass(eq=False)
class NGramLM:
    """Additively smoothed n-gram model with backoff to shorter contexts.

    ``tables[k]`` maps a length-``k`` context tuple to a Counter of next-token
    counts. A context is used only if it was observed in training; otherwise
    the next shorter observed context is used. Because backing off happens
    only on a zero count, the backoff factor cancels out after
    renormalisation and every conditional is exactly

        p(x | ctx) = (count(ctx, x) + delta) / (count(ctx) + delta * V)
    """

    order: int
    delta: float
    vocab: Vocabulary
    fixed_length: bool
    tables: list = field(repr=False)
    backoff: float = DEFAULT_BACKOFF
    _totals: list = field(init=False, repr=False)
    _samplers: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self._totals = [{ctx: sum(c.values()) for ctx, c in table.items()} for table in self.tables]

    @property
    def V(self):
        return self.vocab.size

    def context_for(self, history: Sequence[int]) -> tuple:
        """Longest observed context (at most ``order - 1`` tokens) ending ``history``."""
        padded = (PAD,) * (self.order - 1) + tuple(history)
        for k in range(self.order - 1, 0, -1):
            ctx = padded[len(padded) - k:]
            if self._totals[k].get(ctx, 0) > 0:
                return ctx
        return ()

    def _prob(self, ctx, tok):
        k = len(ctx)
        total = self._totals[k].get(ctx, 0)
        count = self.tables[k][ctx][tok] if total else 0
        return (count + self.delta) / (total + self.delta * self.V)

    def prob(self, token: int, history: Sequence[int] = ()) -> float:
        return self._prob(self.context_for(history), token)

    def next_token_log_probs(self, prefix=()):
        ctx = self.context_for(prefix)
        k = len(ctx)
        total = self._totals[k].get(ctx, 0)
        counts = np.zeros(self.V)
        if total:
            for tok, c in self.tables[k][ctx].items():
                counts[tok] = c
        return np.log((counts + self.delta) / (total + self.delta * self.V))

    def sentence_log_prob(self, sentence, fixed_length=None):
        return ngram_log_prob(self, sentence, fixed_length)

    def sample(self, count, max_length, seed, fixed_length=None):
        return ngram_sample(self, count, max_length, seed, fixed_length)

    def records(self):
        """Sorted ``(k, context, token, count)`` records for every order."""
        out = []
        for k, table in enumerate(self.tables):
            for ctx in sorted(table):
                for tok in sorted(table[ctx]):
                    out.append((k, ctx, tok, table[ctx][tok]))
        return out

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"ngram:{self.order}:{self.delta!r}:{int(self.fixed_length)}:".encode())
        h.update(self.vocab.fingerprint().encode())
        for k, ctx, tok, c in self.records():
            h.update(f"{k}|{','.join(map(str, ctx))}|{tok}|{c};".encode())
        return h.hexdigest()[:16]

    def describe(self):
        return {
            "kind": "ngram-mle",
            "order": self.order,
            "delta": self.delta,
            "vocab_size": self.V,
            "fixed_length": self.fixed_length,
            "backoff": f"stupid backoff {self.backoff} on unseen contexts, renormalised",
            "fingerprint": self.fingerprint(),
        }

    def _sampler(self, ctx):
        s = self._samplers.get(ctx)
        if s is None:
            table = self.tables[len(ctx)].get(ctx)
            toks, cum = [], []
            running = 0
            if table:
                for tok in sorted(table):
                    running += table[tok]
                    toks.append(tok)
                    cum.append(running)
            s = (toks, cum, running)
            self._samplers[ctx] = s
        return s


def train_ngram_mle(train: Corpus, order: int = 3, delta: float = DEFAULT_DELTA,
                    fixed_length: bool | None = None) -> NGramLM:
    """Count n-grams of every order up to ``order`` over padded sentences.

    Each sentence is prefixed with ``order - 1`` padding symbols and, unless
    the corpus is fixed-length, terminated by END.
    """
    if order < 1:
        raise ConfigError("n-gram order must be >= 1")
    if not delta > 0:
        raise ConfigError("smoothing constant delta must be positive")
    if len(train) == 0:
        raise TrainingError("cannot train on an empty corpus")
    if fixed_length is None:
        fixed_length = train.fixed_length
    end = train.vocab.end_id
    tables = [defaultdict(Counter) for _ in range(order)]
    for sentence in train.sequences:
        padded = (PAD,) * (order - 1) + tuple(sentence) + (() if fixed_length else (end,))
        for pos in range(order - 1, len(padded)):
            tok = padded[pos]
            for k in range(order):
                tables[k][padded[pos - k:pos]][tok] += 1
    tables = [dict(t) for t in tables]
    return NGramLM(order=order, delta=float(delta), vocab=train.vocab,
                   fixed_length=bool(fixed_length), tables=tables)


def ngram_log_prob(lm: NGramLM, sentence: Sequence[int], fixed_length: bool | None = None) -> float:
    """Natural-log chain-rule probability of ``sentence``."""
    if fixed_length is None:
        fixed_length = lm.fixed_length
    sentence = tuple(int(t) for t in sentence)
    _check_ids(sentence, lm.V)
    seq = sentence if fixed_length else sentence + (lm.vocab.end_id,)
    terms = []
    for t, tok in enumerate(seq):
        terms.append(math.log(lm._prob(lm.context_for(sentence[:t]), tok)))
    return math.fsum(terms)


def ngram_token_log_probs(lm: NGramLM, sentence, fixed_length=None) -> list[float]:
    if fixed_length is None:
        fixed_length = lm.fixed_length
    sentence = tuple(int(t) for t in sentence)
    _check_ids(sentence, lm.V)
    seq = sentence if fixed_length else sentence + (lm.vocab.end_id,)
    return [math.log(lm._prob(lm.context_for(sentence[:t]), tok)) for t, tok in enumerate(seq)]


def ngram_sample(lm: NGramLM, count: int, max_length: int, seed: int,
                 fixed_length: bool | None = None) -> Corpus:
    """Ancestral sampling.

    Each step is a two-part mixture: with probability
    ``count(ctx) / (count(ctx) + delta*V)`` a token is drawn from the observed
    counts, otherwise uniformly from the vocabulary. Fixed-length mode emits
    exactly ``max_length`` tokens; otherwise sampling stops at END (not
    emitted) or at ``max_length``.
    """
    if count < 1 or max_length < 1:
        raise ConfigError("count and max_length must be >= 1")
    if fixed_length is None:
        fixed_length = lm.fixed_length
    rng = make_rng(seed, "ngram-sample")
    V = lm.V
    dV = lm.delta * V
    end = lm.vocab.end_id
    seqs = []
    for _ in range(count):
        u = rng.random((max_length, 2)).tolist()
        out: list[int] = []
        for t in range(max_length):
            toks, cum, total = lm._sampler(lm.context_for(out))
            u1, u2 = u[t]
            if u1 * (total + dV) < total:
                tok = toks[bisect.bisect_right(cum, u2 * total)]
            else:
                tok = min(int(u2 * V), V - 1)
            if not fixed_length and tok == end:
                break
            out.append(tok)
        seqs.append(tuple(out))
    return Corpus(tuple(seqs), lm.vocab, split="generated", fixed_length=fixed_length,
                  source=f"ngram:{lm.fingerprint()}:seed={seed}")


_MAGIC = b"TXNGRAM\0"
_VERSION = 1


def save_ngram(lm: NGramLM, path) -> None:
    """Versioned binary model file plus a JSON fingerprint sidecar.

    Layout (little endian): magic, then int64 version, order, V, fixed_length,
    float64 delta, then for each k in 0..order-1 an int64 record count
    followed by records of ``k`` context ids, token id and count (all int64).
    Padding positions in contexts are stored as -1.
    """
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<qqqqd", _VERSION, lm.order, lm.V, int(lm.fixed_length), lm.delta))
        for k, table in enumerate(lm.tables):
            recs = [(ctx, tok, table[ctx][tok]) for ctx in sorted(table) for tok in sorted(table[ctx])]
            fh.write(struct.pack("<q", len(recs)))
            for ctx, tok, c in recs:
                fh.write(struct.pack(f"<{k + 2}q", *ctx, tok, c))
    sidecar = {"format": "texeval-ngram", "version": _VERSION, **lm.describe()}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_ngram(path, vocab: Vocabulary | None = None) -> NGramLM:
    path = Path(path)
    data = path.read_bytes()
    pos = len(_MAGIC)
    if data[:pos] != _MAGIC:
        raise ParseError("not a texeval n-gram model file", path)
    if len(data) < pos + struct.calcsize("<qqqqd"):
        raise ParseError("truncated n-gram file header", path)
    version, order, V, fixed, delta = struct.unpack_from("<qqqqd", data, pos)
    pos += struct.calcsize("<qqqqd")
    if version != _VERSION:
        raise ParseError(f"unsupported n-gram file version {version}", path)
    if vocab is None:
        vocab = Vocabulary.synthetic(V)
    elif vocab.size != V:
        raise ConfigError(f"model vocabulary size {V} differs from supplied vocabulary {vocab.size}")
    tables = []
    try:
        for k in range(order):
            (n,) = struct.unpack_from("<q", data, pos)
            pos += 8
            table: dict = defaultdict(Counter)
            fmt = f"<{k + 2}q"
            width = struct.calcsize(fmt)
            for _ in range(n):
                rec = struct.unpack_from(fmt, data, pos)
                pos += width
                table[tuple(rec[:k])][rec[k]] = rec[k + 1]
            tables.append(dict(table))
    except struct.error as exc:
        raise ParseError(f"truncated n-gram file ({exc})", path) from None
    if pos != len(data):
        raise ParseError("trailing bytes in n-gram file", path)
    return NGramLM(order=order, delta=delta, vocab=vocab, fixed_length=bool(fixed), tables=tables)


def read_logprob_file(path) -> list[list[float]]:
    """Per-token natural-log probabilities, one test sentence per line."""
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            try:
                rows.append([float(x) for x in line.split()] if line else [])
            except ValueError:
                raise ParseError("non-numeric log-prob value", path, lineno) from None
    if not rows:
        raise ParseError("empty log-prob file", path)
    return rows


def write_logprob_file(rows, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(" ".join(repr(float(x)) for x in row))
            fh.write("\n")
