"""Command-line entry point ``texeval``.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
Metric commands print one JSON object on standard output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bleu as _bleu
from . import corpus as _corpus
from . import embsim as _embsim
from . import generator as _gen
from . import harness as _harness
from . import nll as _nll
from . import oracle as _oracle
from .errors import (
    ConfigError,
    DegenerateInputError,
    IngestionError,
    OOVError,
    ParseError,
    RangeError,
    TexevalError,
)

VALIDATION_ERRORS = (ConfigError, ParseError, IngestionError, OOVError, RangeError,
                     DegenerateInputError)


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _load(path, vocab_path, split="generated", fixed_length=None):
    if vocab_path:
        vocab = _corpus.load_vocab(vocab_path)
        c = _corpus.load_corpus(path, vocab, split=split)
        if fixed_length is None:
            fixed_length = len({len(s) for s in c.sequences}) == 1
        return c.replace(fixed_length=fixed_length)
    return _corpus.load_corpus_infer(path, split=split, fixed_length=fixed_length)


def _load_pair(a, b, vocab_path, fixed_length=None):
    """Two id corpora on one vocabulary (inferred from the larger max id if no file)."""
    if vocab_path:
        return _load(a, vocab_path, "generated", fixed_length), _load(b, vocab_path, "train", fixed_length)
    ca = _corpus.load_corpus_infer(a, fixed_length=fixed_length)
    cb = _corpus.load_corpus_infer(b, split="train", fixed_length=fixed_length)
    vocab = ca.vocab if ca.vocab.size >= cb.vocab.size else cb.vocab
    return ca.replace(vocab=vocab), cb.replace(vocab=vocab)


def cmd_bleu(args):
    cfg = _bleu.BleuConfig(args.max_order, args.smoothing)
    hyps, refs = _load_pair(args.hyp, args.ref, args.vocab)
    value = _bleu.corpus_bleu(hyps, refs, cfg)
    _emit({"metric": f"bleu-{args.max_order}", "value": value,
           "config": {"max_order": args.max_order, "smoothing": args.smoothing,
                      "fingerprint": cfg.fingerprint(), "hyp": hyps.fingerprint(),
                      "ref": refs.fingerprint()}})


def cmd_self_bleu(args):
    cfg = _bleu.BleuConfig(args.max_order, args.smoothing)
    c = _load(args.corpus, args.vocab)
    value = _bleu.self_bleu(c, cfg, sample_size=args.sample, seed=args.seed)
    _emit({"metric": f"self-bleu-{args.max_order}", "value": value,
           "config": {"max_order": args.max_order, "smoothing": args.smoothing,
                      "sample": args.sample, "seed": args.seed,
                      "fingerprint": cfg.fingerprint(), "corpus": c.fingerprint()}})


def cmd_embsim(args):
    sg = _embsim.SkipGramConfig(args.dim, args.window, args.neg, args.epochs, args.lr, args.seed)
    real, gen = _load_pair(args.real, args.gen, args.vocab)
    gen = gen.replace(vocab=real.vocab)
    value = _embsim.embsim_corpora(real, gen, sg)
    _emit({"metric": "embsim", "value": value,
           "config": {**sg.__dict__, "real": real.fingerprint(), "gen": gen.fingerprint()}})


def _nll_json(metric, r: _nll.NllResult):
    return {"metric": metric, "mean": r.mean, "stderr": r.stderr, "count": r.count,
            "per_token_mean": r.per_token_mean,
            "fingerprints": {"scorer": r.scorer_fingerprint, "corpus": r.corpus_fingerprint}}


def cmd_nll_oracle(args):
    model = _oracle.load_oracle(args.oracle)
    vocab = _corpus.load_vocab(args.vocab) if args.vocab else _corpus.Vocabulary.synthetic(model.vocab_size)
    c = _corpus.load_corpus(args.gen, vocab, split="generated", fixed_length=True)
    _emit(_nll_json("nll-oracle", _nll.nll_oracle(model, c)))


def cmd_nll_test(args):
    vocab = _corpus.load_vocab(args.vocab) if args.vocab else None
    fixed = True if args.fixed_length else None
    if args.model:
        lm = _gen.load_ngram(args.model, vocab)
        test = _corpus.load_corpus(args.test, lm.vocab, split="test",
                                   fixed_length=lm.fixed_length if fixed is None else fixed)
        result = _nll.nll_test(lm, test)
    else:
        if vocab is not None:
            test = _corpus.load_corpus(args.test, vocab, split="test", fixed_length=bool(fixed))
        else:
            test = _corpus.load_corpus_infer(args.test, split="test", fixed_length=bool(fixed))
        result = _nll.nll_test(Path(args.logprobs), test)
    _emit(_nll_json("nll-test", result))


def cmd_oracle_gen(args):
    model = _oracle.init_oracle(args.seed, args.vocab_size, args.embed_dim, args.hidden_dim)
    _oracle.save_oracle(model, args.out)
    info = {"oracle": str(args.out), **model.describe()}
    if args.samples:
        c = _oracle.sample(model, args.count, args.length, args.sample_seed)
        _corpus.save_corpus(c, args.samples)
        info["samples"] = {"path": str(args.samples), "count": len(c), "length": args.length,
                           "fingerprint": c.fingerprint()}
    _emit(info)


def cmd_train(args):
    if args.text:
        toks = _corpus.read_text(args.corpus, args.policy)
        vocab = _corpus.load_vocab(args.vocab) if args.vocab else _corpus.build_vocab(toks, args.min_count)
        c = _corpus.corpus_from_tokens(toks, vocab, policy=args.policy)
        if args.vocab_out:
            _corpus.save_vocab(vocab, args.vocab_out)
    else:
        c = _load(args.corpus, args.vocab, split="train",
                  fixed_length=True if args.fixed_length else None)
    lm = _gen.train_ngram_mle(c, args.order, args.delta)
    _gen.save_ngram(lm, args.out)
    _emit({"model": str(args.out), **lm.describe()})


def cmd_generate(args):
    vocab = _corpus.load_vocab(args.vocab) if args.vocab else None
    lm = _gen.load_ngram(args.model, vocab)
    c = _gen.ngram_sample(lm, args.count, args.max_length, args.seed)
    _corpus.save_corpus(c, args.out)
    _emit({"corpus": str(args.out), "count": len(c), "fingerprint": c.fingerprint()})


def cmd_experiment(args):
    cfg = _harness.load_config(args.config) if args.config else _harness.ExperimentConfig()
    if args.mode:
        cfg = cfg.with_mode(args.mode)
    _harness.validate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = _harness.run_experiment(cfg)
    _harness.emit_report(report, out / "report.json", "json")
    _harness.emit_report(report, out / "report.csv", "csv")
    (out / "config.ini").write_text(_harness.dump_config(cfg), encoding="utf-8")
    _emit({"mode": cfg.mode, "report": str(out / "report.json"), "csv": str(out / "report.csv"),
           "config_fingerprint": report["config_fingerprint"]})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="texeval", description="Text-generation evaluation toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def vocab_opt(sp):
        sp.add_argument("--vocab", help="vocabulary file (default: ids sized by the largest id)")

    sp = sub.add_parser("bleu", help="corpus BLEU of hypotheses against references")
    sp.add_argument("--hyp", required=True)
    sp.add_argument("--ref", required=True)
    sp.add_argument("--max-order", type=int, default=4)
    sp.add_argument("--smoothing", choices=_bleu.SMOOTHING, default="none")
    vocab_opt(sp)
    sp.set_defaults(func=cmd_bleu)

    sp = sub.add_parser("self-bleu", help="Self-BLEU diversity of one corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--max-order", type=int, default=4)
    sp.add_argument("--smoothing", choices=_bleu.SMOOTHING, default="none")
    sp.add_argument("--sample", type=int)
    sp.add_argument("--seed", type=int, default=0)
    vocab_opt(sp)
    sp.set_defaults(func=cmd_self_bleu)

    sp = sub.add_parser("embsim", help="EmbSim between a real and a generated corpus")
    sp.add_argument("--real", required=True)
    sp.add_argument("--gen", required=True)
    sp.add_argument("--dim", type=int, default=32)
    sp.add_argument("--window", type=int, default=5)
    sp.add_argument("--neg", type=int, default=5)
    sp.add_argument("--epochs", type=int, default=5)
    sp.add_argument("--lr", type=float, default=0.025)
    sp.add_argument("--seed", type=int, default=1)
    vocab_opt(sp)
    sp.set_defaults(func=cmd_embsim)

    sp = sub.add_parser("nll-oracle", help="NLL of generated sentences under an oracle")
    sp.add_argument("--oracle", required=True)
    sp.add_argument("--gen", required=True)
    vocab_opt(sp)
    sp.set_defaults(func=cmd_nll_oracle)

    sp = sub.add_parser("nll-test", help="NLL a model assigns to test sentences")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="n-gram model file")
    src.add_argument("--logprobs", help="per-token log-prob file from an external model")
    sp.add_argument("--test", required=True)
    sp.add_argument("--fixed-length", action="store_true", help="score without the END transition")
    vocab_opt(sp)
    sp.set_defaults(func=cmd_nll_test)

    sp = sub.add_parser("oracle", help="oracle utilities")
    osub = sp.add_subparsers(dest="oracle_command", required=True)
    gp = osub.add_parser("gen", help="create a seeded random LSTM oracle")
    gp.add_argument("--seed", type=int, required=True)
    gp.add_argument("--vocab-size", type=int, default=_oracle.DEFAULT_VOCAB)
    gp.add_argument("--embed-dim", type=int, default=_oracle.DEFAULT_EMBED)
    gp.add_argument("--hidden-dim", type=int, default=_oracle.DEFAULT_HIDDEN)
    gp.add_argument("--out", required=True)
    gp.add_argument("--samples", help="also write sampled sentences to this id corpus file")
    gp.add_argument("--count", type=int, default=_oracle.DEFAULT_SAMPLES)
    gp.add_argument("--length", type=int, default=_oracle.DEFAULT_LENGTH)
    gp.add_argument("--sample-seed", type=int, default=0)
    gp.set_defaults(func=cmd_oracle_gen)

    sp = sub.add_parser("train", help="train the n-gram MLE baseline")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--text", action="store_true", help="corpus is raw text, not ids")
    sp.add_argument("--policy", choices=_corpus.POLICIES, default="whitespace+lowercase")
    sp.add_argument("--min-count", type=int, default=1)
    sp.add_argument("--vocab-out", help="write the built vocabulary here (text input)")
    sp.add_argument("--order", type=int, default=3)
    sp.add_argument("--delta", type=float, default=_gen.DEFAULT_DELTA)
    sp.add_argument("--fixed-length", action="store_true")
    sp.add_argument("--out", required=True)
    vocab_opt(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("generate", help="sample sentences from an n-gram model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--max-length", type=int, default=20)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    vocab_opt(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("experiment", help="run the synthetic or real pipeline")
    sp.add_argument("--config")
    sp.add_argument("--mode", choices=("synthetic", "real"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        args.func(args)
    except VALIDATION_ERRORS as exc:
        sys.stderr.write(f"texeval: error: {exc}\n")
        return 1
    except (TexevalError, OSError) as exc:
        sys.stderr.write(f"texeval: runtime error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
