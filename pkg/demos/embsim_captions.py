"""
EmbSim on caption-like text
===========================

Train skip-gram embeddings on two halves of the bundled sample corpus and
compare their word-similarity matrices. Real text resembles real text;
shuffling tokens across sentences destroys the co-occurrence structure.
"""

from texeval import corpus, embsim
from texeval.harness import sample_corpus_path

tokens = corpus.read_text(sample_corpus_path(), "whitespace+lowercase", limit=6000)
vocab = corpus.build_vocab(tokens)
full = corpus.corpus_from_tokens(tokens, vocab)
train, test = corpus.split(full, 0.5, seed=11)
print(f"{len(train)} train / {len(test)} test sentences, {vocab.size} word types")

cfg = embsim.SkipGramConfig(dim=32, window=5, negatives=5, epochs=3, seed=1)
emb = embsim.train_skipgram(train, config=cfg)
print("mean loss per epoch:", [round(x, 3) for x in emb.epoch_losses])

W_train = embsim.similarity_matrix(emb)
sim = W_train.values
for a, b in [("kitchen", "stove"), ("kitchen", "surfboard"), ("beach", "ocean")]:
    print(f"cos({a}, {b}) = {sim[vocab.id(a), vocab.id(b)]:.3f}")

W_test = embsim.similarity_matrix(embsim.train_skipgram(test, config=cfg))
print("EmbSim(train, train):", embsim.embsim(W_train, W_train))
print("EmbSim(train, test): ", round(embsim.embsim(W_train, W_test), 4))

# same sentence lengths and word counts, but words scattered across sentences
import numpy as np
flat = np.array([t for s in test.sequences for t in s])
np.random.default_rng(0).shuffle(flat)
cuts = np.cumsum([len(s) for s in test.sequences])[:-1]
shuffled = test.replace([tuple(p.tolist()) for p in np.split(flat, cuts)])
W_shuf = embsim.similarity_matrix(embsim.train_skipgram(shuffled, config=cfg))
print("EmbSim(train, shuffled):", round(embsim.embsim(W_train, W_shuf), 4))
