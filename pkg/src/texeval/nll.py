"""NLL-oracle and NLL-test.

Both metrics average, over sentences, the negative natural-log probability
of the whole sentence (summed over its tokens). A per-token average is also
reported for readability.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

from . import oracle as _oracle
from ._parallel import stable_mean_stderr
from .corpus import Corpus
from .errors import AlignmentError, ConfigError, MetricError, ValidityError
from .generator import read_logprob_file


@dataclass(frozen=True)
class NllResult:
    mean: float
    stderr: float
    count: int
    per_token_mean: float
    scorer_fingerprint: str
    corpus_fingerprint: str
    values: tuple | None = None

    def as_dict(self, include_values=False):
        d = asdict(self)
        if not include_values:
            d.pop("values")
        else:
            d["values"] = list(self.values or ())
        return d


def _result(nlls, n_tokens, scorer_fp, corpus_fp, keep_values):
    mean, se = stable_mean_stderr(nlls)
    per_token = math.fsum(nlls) / n_tokens if n_tokens else 0.0
    return NllResult(mean=mean, stderr=se, count=len(nlls), per_token_mean=per_token,
                     scorer_fingerprint=scorer_fp, corpus_fingerprint=corpus_fp,
                     values=tuple(nlls) if keep_values else None)


def nll_oracle(oracle: _oracle.OracleModel, generated: Corpus, keep_values: bool = False) -> NllResult:
    """Mean negative oracle log-likelihood of generated sentences (no END term)."""
    if len(generated) == 0:
        raise MetricError("NLL-oracle needs a non-empty generated corpus")
    if generated.vocab.size != oracle.vocab_size:
        raise ConfigError(
            f"generated vocabulary size {generated.vocab.size} != oracle vocabulary {oracle.vocab_size}")
    per_token = _oracle.log_prob_batch(oracle, generated.sequences)
    nlls = [-math.fsum(x.tolist()) for x in per_token]
    return _result(nlls, generated.num_tokens, oracle.fingerprint(), generated.fingerprint(), keep_values)


def _nll_from_rows(rows, test: Corpus):
    if len(rows) != len(test):
        raise AlignmentError(f"log-prob file has {len(rows)} lines for {len(test)} test sentences")
    extra = 0 if test.fixed_length else 1
    nlls = []
    for k, (row, sentence) in enumerate(zip(rows, test.sequences)):
        if len(row) != len(sentence) + extra:
            raise AlignmentError(
                f"sentence {k}: {len(row)} log-probs for {len(sentence)} tokens"
                + ("" if test.fixed_length else " plus END"))
        for v in row:
            if not v <= 0.0:
                raise ValidityError(f"sentence {k}: log-prob {v} is not a valid log-probability")
        nlls.append(-math.fsum(row))
    return nlls


def nll_test(generator, test: Corpus, keep_values: bool = False) -> NllResult:
    """Mean negative log-likelihood a generator assigns to held-out sentences.

    ``generator`` is any object with ``sentence_log_prob`` (or the batched
    ``sentence_log_probs``), a list of per-token log-prob rows, or a path to
    a per-token log-prob file. The END transition is scored unless ``test``
    is fixed-length.
    """
    if len(test) == 0:
        raise MetricError("NLL-test needs a non-empty test corpus")
    extra = 0 if test.fixed_length else 1
    n_tokens = test.num_tokens + extra * len(test)
    if isinstance(generator, (str, Path)):
        nlls = _nll_from_rows(read_logprob_file(generator), test)
        return _result(nlls, n_tokens, f"logprobs:{Path(generator).name}", test.fingerprint(), keep_values)
    if isinstance(generator, list):
        nlls = _nll_from_rows(generator, test)
        return _result(nlls, n_tokens, "logprobs", test.fingerprint(), keep_values)
    vocab = getattr(generator, "vocab", None)
    if vocab is not None and vocab != test.vocab:
        raise ConfigError("generator and test corpus use different vocabularies")
    if hasattr(generator, "sentence_log_probs"):
        lps = generator.sentence_log_probs(test.sequences, fixed_length=test.fixed_length)
    else:
        lps = [generator.sentence_log_prob(s, fixed_length=test.fixed_length) for s in test.sequences]
    nlls = [-float(v) for v in lps]
    return _result(nlls, n_tokens, generator.fingerprint(), test.fingerprint(), keep_values)
