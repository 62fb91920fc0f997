"""BLEU and Self-BLEU over token-id sentences.

Sentence BLEU is the geometric mean of clipped n-gram precisions for orders
``1..max_order`` (uniform weights) times the brevity penalty. Corpus BLEU is
the mean sentence BLEU of each hypothesis against the whole reference corpus;
Self-BLEU scores each sentence against all the others in its own corpus.

For corpus-scale work the reference side is indexed once: per order, the
maximum count of every n-gram over all references (and, for Self-BLEU, the
runner-up so that one sentence can be excluded in O(1)).
"""

from __future__ import annotations

import bisect
import hashlib
import json
import math
import warnings
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Sequence

from ._parallel import map_chunks, stable_mean
from ._rng import make_rng
from .corpus import Corpus
from .errors import ConfigError, MetricError

SMOOTHING = ("none", "epsilon")
_CHUNK = 256


@dataclass(frozen=True)
class BleuConfig:
    max_order: int = 4
    smoothing: str = "none"
    epsilon: float = 1e-9

    def __post_init__(self):
        if not 1 <= self.max_order <= 5:
            raise ConfigError(f"max_order must lie in [1, 5], got {self.max_order}")
        if self.smoothing not in SMOOTHING:
            raise ConfigError(f"unknown smoothing mode {self.smoothing!r}")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")

    @property
    def weights(self) -> tuple[float, ...]:
        return (1.0 / self.max_order,) * self.max_order

    def fingerprint(self) -> str:
        raw = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(raw.encode()).hexdigest()[:16]


def ngram_counts(sentence: Sequence[int], n: int) -> Counter:
    if n < 1:
        raise ConfigError("n-gram order must be >= 1")
    s = tuple(sentence)
    return Counter(s[i:i + n] for i in range(len(s) - n + 1))


def modified_precision(hyp, refs, n: int) -> tuple[int, int]:
    """(clipped matches, total hypothesis n-grams) at order ``n``."""
    if len(refs) == 0:
        raise ConfigError("modified precision needs at least one reference")
    counts = ngram_counts(hyp, n)
    max_ref: Counter = Counter()
    for ref in refs:
        max_ref |= ngram_counts(ref, n)
    clipped = sum(min(c, max_ref[g]) for g, c in counts.items())
    return clipped, sum(counts.values())


def closest_length(sorted_lengths: Sequence[int], c: int) -> int:
    """Reference length closest to ``c``; ties go to the shorter one."""
    i = bisect.bisect_left(sorted_lengths, c)
    best = None
    for j in (i - 1, i):
        if 0 <= j < len(sorted_lengths):
            r = sorted_lengths[j]
            if best is None or (abs(r - c), r) < (abs(best - c), best):
                best = r
    return best


def brevity_penalty(c: int, r: int) -> float:
    if c > r:
        return 1.0
    return math.exp(1.0 - r / c)


def _combine(stats, c, r, cfg: BleuConfig, order: int | None = None) -> float:
    """BLEU from per-order (clipped, total) pairs, hypothesis and reference lengths."""
    order = cfg.max_order if order is None else order
    if c == 0:
        return 0.0
    w = 1.0 / order
    logs = []
    for clipped, total in stats[:order]:
        if clipped == 0:
            if cfg.smoothing == "none":
                return 0.0
            p = cfg.epsilon / max(total, 1)
        else:
            p = clipped / total
        logs.append(w * math.log(p))
    return math.exp(math.fsum(logs)) * brevity_penalty(c, r)


def bleu(hyp, refs, cfg: BleuConfig = BleuConfig()) -> float:
    """Sentence BLEU of ``hyp`` against ``refs``, in [0, 1]."""
    if len(refs) == 0:
        raise ConfigError("BLEU needs at least one reference")
    if len(hyp) == 0:
        warnings.warn("empty hypothesis scores BLEU 0", RuntimeWarning, stacklevel=2)
        return 0.0
    stats = [modified_precision(hyp, refs, n) for n in range(1, cfg.max_order + 1)]
    r = closest_length(sorted(len(ref) for ref in refs), len(hyp))
    return _combine(stats, len(hyp), r, cfg)


class ReferenceIndex:
    """Max n-gram counts and sorted lengths of a fixed reference set."""

    def __init__(self, refs: Sequence[Sequence[int]], max_order: int):
        if len(refs) == 0:
            raise ConfigError("reference set is empty")
        self.max_order = max_order
        self.max_counts = [dict() for _ in range(max_order)]
        for ref in refs:
            for n in range(1, max_order + 1):
                table = self.max_counts[n - 1]
                for g, c in ngram_counts(ref, n).items():
                    if c > table.get(g, 0):
                        table[g] = c
        self.lengths = sorted(len(r) for r in refs)

    def stats(self, hyp, max_order=None):
        max_order = max_order or self.max_order
        out = []
        for n in range(1, max_order + 1):
            table = self.max_counts[n - 1]
            counts = ngram_counts(hyp, n)
            clipped = sum(min(c, table.get(g, 0)) for g, c in counts.items())
            out.append((clipped, sum(counts.values())))
        return out

    def closest(self, c):
        return closest_length(self.lengths, c)


class SelfIndex:
    """Leave-one-out reference statistics for every sentence of a corpus.

    Per n-gram it keeps the maximum count, how many sentences reach it and
    the runner-up count. Excluding a sentence whose own count is the unique
    maximum falls back to the runner-up.
    """

    def __init__(self, sentences: Sequence[Sequence[int]], max_order: int):
        if len(sentences) < 2:
            raise MetricError("Self-BLEU needs at least two sentences")
        self.sentences = [tuple(s) for s in sentences]
        self.max_order = max_order
        self.tables = []
        for n in range(1, max_order + 1):
            table: dict = {}
            for s in self.sentences:
                for g, c in ngram_counts(s, n).items():
                    top = table.get(g)
                    if top is None:
                        table[g] = [c, 1, 0]
                    elif c > top[0]:
                        table[g] = [c, 1, top[0]]
                    elif c == top[0]:
                        top[1] += 1
                    elif c > top[2]:
                        top[2] = c
            self.tables.append(table)
        self.length_counts = Counter(len(s) for s in self.sentences)
        self.lengths = sorted(self.length_counts)

    def stats(self, k: int, max_order=None):
        max_order = max_order or self.max_order
        hyp = self.sentences[k]
        out = []
        for n in range(1, max_order + 1):
            table = self.tables[n - 1]
            counts = ngram_counts(hyp, n)
            clipped = 0
            for g, c in counts.items():
                top, n_top, second = table[g]
                other = second if (c == top and n_top == 1) else top
                clipped += min(c, other)
            out.append((clipped, sum(counts.values())))
        return out

    def closest(self, k: int):
        own = len(self.sentences[k])
        lengths = self.lengths
        if self.length_counts[own] == 1:
            lengths = [x for x in lengths if x != own]
        return closest_length(lengths, own)


def _check_same_vocab(a: Corpus, b: Corpus):
    if a.vocab != b.vocab:
        raise ConfigError("hypothesis and reference corpora use different vocabularies")


def _sentence_scores(n_items, stats_fn, lengths_fn, cfg, orders):
    """BLEU for every item at each order in ``orders``; chunked, order preserving."""
    top = max(orders)

    def work(lo, hi):
        rows = []
        for k in range(lo, hi):
            c, r = lengths_fn(k)
            if c == 0:
                rows.append([0.0] * len(orders))
                continue
            stats = stats_fn(k, top)
            rows.append([_combine(stats, c, r, cfg, order=n) for n in orders])
        return rows

    out = []
    for part in map_chunks(work, n_items, _CHUNK):
        out.extend(part)
    return out


def corpus_bleu_by_order(hyps: Corpus, refs: Corpus, cfg: BleuConfig = BleuConfig(),
                         orders: Sequence[int] | None = None) -> dict[int, float]:
    """Mean sentence BLEU-n for each ``n`` in ``orders`` (default: ``cfg.max_order``)."""
    orders = tuple(orders or (cfg.max_order,))
    if len(hyps) == 0 or len(refs) == 0:
        raise ConfigError("BLEU needs non-empty hypothesis and reference corpora")
    _check_same_vocab(hyps, refs)
    index = ReferenceIndex(refs.sequences, max(orders))
    seqs = hyps.sequences
    empty = sum(1 for s in seqs if not s)
    if empty:
        warnings.warn(f"{empty} empty hypotheses score BLEU 0", RuntimeWarning, stacklevel=2)

    rows = _sentence_scores(
        len(seqs),
        lambda k, top: index.stats(seqs[k], top),
        lambda k: (len(seqs[k]), index.closest(len(seqs[k])) if seqs[k] else 0),
        cfg, orders,
    )
    return {n: stable_mean(row[j] for row in rows) for j, n in enumerate(orders)}


def corpus_bleu(hyps: Corpus, refs: Corpus, cfg: BleuConfig = BleuConfig()) -> float:
    return corpus_bleu_by_order(hyps, refs, cfg)[cfg.max_order]


def _sample_indices(m, sample_size, seed):
    if sample_size is None or sample_size >= m:
        return list(range(m))
    if sample_size < 1:
        raise ConfigError("sample_size must be >= 1")
    rng = make_rng(seed, "self-bleu-sample")
    return sorted(rng.choice(m, size=sample_size, replace=False).tolist())


def self_bleu_by_order(corpus: Corpus, cfg: BleuConfig = BleuConfig(),
                       orders: Sequence[int] | None = None,
                       sample_size: int | None = None, seed: int = 0) -> dict[int, float]:
    orders = tuple(orders or (cfg.max_order,))
    seqs = corpus.sequences if isinstance(corpus, Corpus) else [tuple(s) for s in corpus]
    if len(seqs) < 2:
        raise MetricError("Self-BLEU needs at least two sentences")
    index = SelfIndex(seqs, max(orders))
    picked = _sample_indices(len(seqs), sample_size, seed)
    rows = _sentence_scores(
        len(picked),
        lambda k, top: index.stats(picked[k], top),
        lambda k: (len(seqs[picked[k]]), index.closest(picked[k]) if seqs[picked[k]] else 0),
        cfg, orders,
    )
    return {n: stable_mean(row[j] for row in rows) for j, n in enumerate(orders)}


def self_bleu(corpus: Corpus, cfg: BleuConfig = BleuConfig(),
              sample_size: int | None = None, seed: int = 0) -> float:
    """Mean BLEU of each (sampled) sentence against every other sentence."""
    return self_bleu_by_order(corpus, cfg, sample_size=sample_size, seed=seed)[cfg.max_order]
