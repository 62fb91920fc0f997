"""Tokenization, vocabularies and token-id corpora.

File formats
------------
* text corpus: UTF-8, one sentence per line
* token-id corpus: one sentence per line, decimal ids separated by single
  spaces, newline terminated, no trailing spaces
* vocabulary: one token per line, the 0-based line number is the id; the
  first two lines are the START and END markers
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ._rng import make_rng
from .errors import ConfigError, IngestionError, OOVError, ParseError, RangeError

START = "<s>"
END = "</s>"
START_ID = 0
END_ID = 1

POLICIES = ("whitespace", "whitespace+lowercase")

SPLITS = ("train", "test", "generated", "oracle")


def tokenize(line: str, policy: str = "whitespace") -> list[str]:
    if policy not in POLICIES:
        raise ConfigError(f"unknown tokenization policy {policy!r}")
    if policy == "whitespace+lowercase":
        line = line.lower()
    return line.split()


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Bijection between surface tokens and ids ``0..N-1``.

    Ids 0 and 1 are always the START and END markers.
    """

    tokens: tuple[str, ...]
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        tokens = tuple(self.tokens)
        if len(tokens) < 2 or tokens[START_ID] != START or tokens[END_ID] != END:
            raise IngestionError("vocabulary must start with the START and END markers")
        index = {tok: i for i, tok in enumerate(tokens)}
        if len(index) != len(tokens):
            raise IngestionError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __hash__(self):
        return hash(self.tokens)

    @property
    def start_id(self) -> int:
        return START_ID

    @property
    def end_id(self) -> int:
        return END_ID

    def id(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise OOVError(token) from None

    def token(self, idx: int) -> str:
        if not 0 <= idx < len(self.tokens):
            raise RangeError(f"token id {idx} outside [0, {len(self.tokens)})")
        return self.tokens[idx]

    def __contains__(self, token):
        return token in self._index

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for tok in self.tokens:
            h.update(tok.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()[:16]

    @classmethod
    def synthetic(cls, size: int) -> "Vocabulary":
        """Vocabulary for oracle data: the two markers plus ``t2 .. t{size-1}``."""
        if size < 2:
            raise ConfigError("synthetic vocabulary needs size >= 2")
        return cls((START, END) + tuple(f"t{i}" for i in range(2, size)))


def build_vocab(source: Iterable[Sequence[str]], min_count: int = 1) -> Vocabulary:
    """Vocabulary of every token seen at least ``min_count`` times.

    Ids after the two markers are assigned by descending frequency, ties
    broken lexicographically, so the result ignores sentence order.
    """
    if min_count < 0:
        raise ConfigError("min_count must be non-negative")
    counts: Counter = Counter()
    n_sentences = 0
    for sentence in source:
        n_sentences += 1
        counts.update(sentence)
    if n_sentences == 0:
        raise IngestionError("cannot build a vocabulary from an empty source")
    for marker in (START, END):
        if marker in counts:
            raise IngestionError(f"reserved marker {marker!r} appears in the source text")
    kept = [tok for tok, c in counts.items() if c >= min_count]
    kept.sort(key=lambda tok: (-counts[tok], tok))
    return Vocabulary((START, END, *kept))


def encode(vocab: Vocabulary, tokens: Sequence[str]) -> tuple[int, ...]:
    return tuple(vocab.id(tok) for tok in tokens)


def decode(vocab: Vocabulary, ids: Sequence[int]) -> list[str]:
    return [vocab.token(int(i)) for i in ids]


@dataclass(frozen=True, eq=False)
class Corpus:
    """Token-id sentences over a vocabulary, plus where they came from.

    ``fixed_length`` marks synthetic (oracle-protocol) data, whose sentences
    carry no END transition when scored.
    """

    sequences: tuple[tuple[int, ...], ...]
    vocab: Vocabulary
    split: str = "train"
    policy: str = "whitespace"
    fixed_length: bool = False
    source: str | None = None

    def __post_init__(self):
        seqs = tuple(tuple(int(i) for i in s) for s in self.sequences)
        n = self.vocab.size
        for k, s in enumerate(seqs):
            for i in s:
                if not 0 <= i < n:
                    raise RangeError(f"sentence {k}: token id {i} outside [0, {n})")
        if self.split not in SPLITS:
            raise ConfigError(f"unknown split tag {self.split!r}")
        object.__setattr__(self, "sequences", seqs)

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def __getitem__(self, k):
        return self.sequences[k]

    def __eq__(self, other):
        return (
            isinstance(other, Corpus)
            and self.sequences == other.sequences
            and self.vocab == other.vocab
        )

    __hash__ = None

    @property
    def num_tokens(self) -> int:
        return sum(len(s) for s in self.sequences)

    def replace(self, sequences=None, **changes) -> "Corpus":
        kw = dict(
            sequences=self.sequences if sequences is None else sequences,
            vocab=self.vocab,
            split=self.split,
            policy=self.policy,
            fixed_length=self.fixed_length,
            source=self.source,
        )
        kw.update(changes)
        return Corpus(**kw)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.vocab.fingerprint().encode())
        h.update(b"fixed" if self.fixed_length else b"var")
        for s in self.sequences:
            h.update(" ".join(map(str, s)).encode())
            h.update(b"\n")
        return h.hexdigest()[:16]

    def decoded(self) -> list[list[str]]:
        return [decode(self.vocab, s) for s in self.sequences]


def read_text(path, policy: str = "whitespace", limit: int | None = None) -> list[list[str]]:
    """Tokenized non-blank lines of a UTF-8 text corpus."""
    path = Path(path)
    out = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            toks = tokenize(line, policy)
            if toks:
                out.append(toks)
                if limit is not None and len(out) >= limit:
                    break
    if not out:
        raise IngestionError(f"{path}: no sentences found")
    return out


def corpus_from_tokens(
    sentences: Iterable[Sequence[str]],
    vocab: Vocabulary,
    split: str = "train",
    policy: str = "whitespace",
    fixed_length: bool = False,
    source: str | None = None,
) -> Corpus:
    seqs = tuple(encode(vocab, s) for s in sentences)
    if not seqs:
        raise IngestionError("corpus source is empty")
    return Corpus(seqs, vocab, split=split, policy=policy, fixed_length=fixed_length, source=source)


def split(corpus: Corpus, ratio: float, seed: int) -> tuple[Corpus, Corpus]:
    """Seeded random partition into (train, test).

    ``|train| = round(ratio * |corpus|)`` with halves rounded up. Each part
    keeps the original relative order of its sentences.
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must lie in (0, 1), got {ratio}")
    m = len(corpus)
    if m == 0:
        raise IngestionError("cannot split an empty corpus")
    n_train = int(math.floor(ratio * m + 0.5))
    perm = make_rng(seed, "split").permutation(m)
    train_idx = sorted(perm[:n_train].tolist())
    test_idx = sorted(perm[n_train:].tolist())
    seqs = corpus.sequences
    train = corpus.replace([seqs[i] for i in train_idx], split="train")
    test = corpus.replace([seqs[i] for i in test_idx], split="test")
    return train, test


def format_ids(seq: Sequence[int]) -> str:
    return " ".join(str(int(i)) for i in seq)


def save_corpus(corpus: Corpus, path) -> None:
    with Path(path).open("w", encoding="ascii", newline="\n") as fh:
        for s in corpus.sequences:
            fh.write(format_ids(s))
            fh.write("\n")


def _parse_id_lines(path, limit_n: int | None):
    path = Path(path)
    seqs = []
    with path.open(encoding="ascii", errors="strict", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw[:-1] if raw.endswith("\n") else raw
            if line.endswith("\r"):
                line = line[:-1]
            if line == "":
                seqs.append(())
                continue
            fields = line.split(" ")
            ids = []
            for f in fields:
                if not f.isdigit():
                    raise ParseError(f"non-integer field {f!r}", path, lineno)
                i = int(f)
                if limit_n is not None and i >= limit_n:
                    raise ParseError(f"token id {i} outside [0, {limit_n})", path, lineno)
                ids.append(i)
            seqs.append(tuple(ids))
    if not seqs:
        raise ParseError("empty corpus file", path)
    return seqs


def load_corpus(
    path,
    vocab: Vocabulary,
    split: str = "train",
    fixed_length: bool = False,
    policy: str = "whitespace",
) -> Corpus:
    seqs = _parse_id_lines(path, vocab.size)
    return Corpus(tuple(seqs), vocab, split=split, policy=policy,
                  fixed_length=fixed_length, source=str(path))


def load_corpus_infer(path, split: str = "generated", fixed_length: bool | None = None) -> Corpus:
    """Load an id corpus without a vocabulary file.

    The vocabulary is synthetic and sized by the largest id present. When
    ``fixed_length`` is None it is set if every sentence has the same length.
    """
    seqs = _parse_id_lines(path, None)
    top = max((max(s) for s in seqs if s), default=1)
    vocab = Vocabulary.synthetic(max(2, top + 1))
    if fixed_length is None:
        fixed_length = len({len(s) for s in seqs}) == 1
    return Corpus(tuple(seqs), vocab, split=split, fixed_length=fixed_length, source=str(path))


def save_vocab(vocab: Vocabulary, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for tok in vocab.tokens:
            fh.write(tok)
            fh.write("\n")


def load_vocab(path) -> Vocabulary:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        tokens = [line.rstrip("\n") for line in fh]
    if len(tokens) < 2:
        raise ParseError("vocabulary file needs at least the two marker lines", path)
    for lineno, tok in enumerate(tokens, start=1):
        if not tok or any(ch.isspace() for ch in tok):
            raise ParseError(f"invalid token {tok!r}", path, lineno)
    return Vocabulary(tuple(tokens))
