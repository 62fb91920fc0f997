"""
Self-BLEU as a diversity score
==============================

Each sentence is scored against all the others. A collapsed generator that
keeps producing one sentence gets 1.0; varied text scores much lower.
"""

import numpy as np

from texeval.bleu import BleuConfig, self_bleu
from texeval.corpus import Corpus, Vocabulary

vocab = Vocabulary.synthetic(60)
rng = np.random.default_rng(0)

# total collapse: 200 copies of one sentence
collapsed = Corpus(((5, 9, 12, 30, 7),) * 200, vocab)

# partial collapse: one template with a single slot filled at random
template = [5, 9, 12, 30, 7]
partial = []
for _ in range(200):
    s = list(template)
    s[rng.integers(5)] = int(rng.integers(2, 60))
    partial.append(tuple(s))
partial = Corpus(tuple(partial), vocab)

# no structure at all
varied = Corpus(tuple(map(tuple, rng.integers(2, 60, size=(200, 5)).tolist())), vocab)

cfg = BleuConfig(max_order=3)
for name, c in [("collapsed", collapsed), ("one slot varies", partial), ("random", varied)]:
    print(f"{name:>16}: Self-BLEU-3 = {self_bleu(c, cfg):.4f}")

# large corpora can be scored on a seeded subsample of hypotheses
print("sampled (50 of 200):", round(self_bleu(partial, cfg, sample_size=50, seed=1), 4))
