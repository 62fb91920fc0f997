"""Seeded random streams.

All randomness goes through ``numpy.random.Generator`` on the counter-based
Philox bit generator. Normal variates use numpy's ziggurat ``standard_normal``;
both are part of numpy's stream-compatibility policy, so a given seed yields
the same numbers on every platform.

Named substreams are derived from a base seed and a list of labels, which
lets each pipeline stage own an independent stream without sharing state.
"""

import zlib

import numpy as np


def _label_words(label):
    if isinstance(label, (int, np.integer)):
        return [int(label) & 0xFFFFFFFF]
    return [zlib.crc32(str(label).encode("utf-8"))]


def derive_seed(seed, *labels):
    """Deterministically derive a 63-bit seed from ``seed`` and ``labels``."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for label in labels:
        entropy.extend(_label_words(label))
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def make_rng(seed, *labels):
    if labels:
        seed = derive_seed(seed, *labels)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
