"""texeval: metrics and experiment pipelines for open-domain text generation."""

__version__ = "0.1.0"

from .bleu import BleuConfig, corpus_bleu, modified_precision, ngram_counts, self_bleu
from .corpus import (
    Corpus,
    Vocabulary,
    build_vocab,
    decode,
    encode,
    load_corpus,
    save_corpus,
    split,
    tokenize,
)
from .embsim import (
    EmbeddingTable,
    SimilarityMatrix,
    SkipGramConfig,
    similarity_matrix,
    train_skipgram,
)
from .errors import TexevalError
from .generator import NGramLM, UniformGenerator, ngram_log_prob, ngram_sample, train_ngram_mle
from .harness import ExperimentConfig, emit_report, load_config, run_real, run_synthetic
from .nll import NllResult, nll_oracle, nll_test
from .oracle import LstmState, OracleModel, init_oracle, log_prob, sample, step

__all__ = [
    "BleuConfig", "Corpus", "EmbeddingTable", "ExperimentConfig", "LstmState", "NGramLM",
    "NllResult", "OracleModel", "SimilarityMatrix", "SkipGramConfig", "TexevalError",
    "UniformGenerator", "Vocabulary", "build_vocab", "corpus_bleu", "decode",
    "emit_report", "encode", "init_oracle", "load_config", "load_corpus", "log_prob",
    "modified_precision", "ngram_counts", "ngram_log_prob", "ngram_sample", "nll_oracle",
    "nll_test", "run_real", "run_synthetic", "sample", "save_corpus", "self_bleu",
    "similarity_matrix", "split", "step", "tokenize", "train_ngram_mle", "train_skipgram",
]
