"""
BLEU on a handful of sentences
==============================

Clipped n-gram precision, the brevity penalty, and why a corpus of copies
of one sentence looks great against references and terrible for diversity.
"""

from texeval.bleu import BleuConfig, bleu, modified_precision
from texeval.corpus import build_vocab, encode

refs_text = [["the", "cat", "is", "on", "the", "mat"],
             ["there", "is", "a", "cat", "on", "the", "mat"]]
vocab = build_vocab(refs_text + [["the"] * 7])
refs = [encode(vocab, r) for r in refs_text]

# a hypothesis that just repeats "the": unigram precision is clipped at 2/7
hyp = encode(vocab, ["the"] * 7)
print("clipped unigram matches / total:", modified_precision(hyp, refs, 1))

# a short but accurate hypothesis is held back by the brevity penalty
short = encode(vocab, ["the", "cat", "is", "on"])
for n in (1, 2, 3, 4):
    print(f"BLEU-{n} of 'the cat is on':", round(bleu(short, refs, BleuConfig(max_order=n)), 4))

# with smoothing 'none' a single missing 4-gram zeroes the score;
# 'epsilon' keeps it tiny but positive
odd = encode(vocab, ["the", "mat", "is", "on", "a", "cat"])
print("no smoothing:", bleu(odd, refs, BleuConfig()))
print("epsilon smoothing:", bleu(odd, refs, BleuConfig(smoothing="epsilon")))
