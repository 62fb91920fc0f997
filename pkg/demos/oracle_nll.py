"""
A random LSTM as ground truth
=============================

Build the seeded oracle, sample sentences from it, and score corpora by
their exact oracle likelihood. Oracle samples score near the oracle's own
entropy; uniform noise scores far worse; a bigram model fitted on oracle
samples lands in between.
"""

import numpy as np

from texeval import oracle
from texeval.corpus import Corpus
from texeval.generator import UniformGenerator, train_ngram_mle
from texeval.nll import nll_oracle, nll_test

# a smaller oracle than the default 5000-word one keeps this quick
model = oracle.init_oracle(seed=88, V=500, E=32, H=32)
print(model.describe())

train = oracle.sample(model, 2000, 20, seed=1)
test = oracle.sample(model, 1000, 20, seed=2)
print("first sample:", train.sequences[0])

# entropy estimate: the oracle scoring its own fresh samples
ref = nll_oracle(model, test)
print(f"oracle samples:  NLL-oracle {ref.mean:.2f} +- {ref.stderr:.2f}")

rng = np.random.default_rng(3)
noise = Corpus(tuple(map(tuple, rng.integers(0, 500, size=(1000, 20)).tolist())),
               test.vocab, fixed_length=True)
print(f"uniform noise:   NLL-oracle {nll_oracle(model, noise).mean:.2f}")

bigram = train_ngram_mle(train.replace(split="train"), order=2)
generated = bigram.sample(1000, 20, seed=4, fixed_length=True)
print(f"bigram samples:  NLL-oracle {nll_oracle(model, generated).mean:.2f}")

# NLL-test flips the roles: the generator scores held-out oracle data
print(f"bigram NLL-test  {nll_test(bigram, test).mean:.2f}")
print(f"uniform NLL-test {nll_test(UniformGenerator(test.vocab), test).mean:.2f}  (= 20 ln 500)")
