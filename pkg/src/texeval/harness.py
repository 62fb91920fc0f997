"""Experiment pipelines, configuration and metric reports.

Two pipelines mirror the two evaluation modes:

* ``run_synthetic``: a seeded random LSTM oracle produces training and
  held-out data; the n-gram baseline is trained on growing fractions of the
  training data and scored with NLL-oracle and NLL-test.
* ``run_real``: a text corpus is split in half; at each checkpoint the
  baseline's samples are scored with BLEU (against both halves),
  Self-BLEU, EmbSim and NLL-test.

Checkpoint fraction 0 stands for the untrained model (uniform over the
vocabulary). Configuration files are INI documents with the sections
``[data] [oracle] [generator] [metrics] [schedule]``; every key is optional
and falls back to the defaults defined below.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import bleu as _bleu
from . import corpus as _corpus
from . import embsim as _embsim
from . import generator as _gen
from . import nll as _nll
from . import oracle as _oracle
from ._parallel import thread_count
from ._rng import derive_seed, make_rng
from .errors import ConfigError, TexevalError

REPORT_SCHEMA = "texeval-report/1"
METRIC_SECTIONS = ("data", "checkpoints", "references")


def sample_corpus_path() -> Path:
    """Path of the bundled caption-style sample corpus (20,000 lines)."""
    return Path(str(resources.files("texeval") / "data" / "sample_captions.txt"))


@dataclass
class DataConfig:
    mode: str = "synthetic"
    input: str | None = None
    max_sentences: int = 20_000
    policy: str = "whitespace+lowercase"
    min_count: int = 1
    split_ratio: float = 0.5
    split_seed: int | None = 11


@dataclass
class OracleConfig:
    vocab_size: int = _oracle.DEFAULT_VOCAB
    embed_dim: int = _oracle.DEFAULT_EMBED
    hidden_dim: int = _oracle.DEFAULT_HIDDEN
    seed: int | None = 88
    length: int = _oracle.DEFAULT_LENGTH
    num_samples: int = _oracle.DEFAULT_SAMPLES
    test_samples: int = _oracle.DEFAULT_SAMPLES
    sample_seed: int | None = 2017


@dataclass
class GeneratorConfig:
    order: int | None = None  # 2 for synthetic, 3 for real
    delta: float = _gen.DEFAULT_DELTA
    sample_seed: int | None = 7
    generated_size: int | None = None  # defaults to the test-set size
    max_length: int | None = None  # synthetic: oracle length; real: longest training sentence


@dataclass
class MetricsConfig:
    bleu_orders: tuple = (2, 3, 4, 5)
    smoothing: str = "none"
    self_bleu_sample: int | None = None
    self_bleu_seed: int | None = 5
    emb_dim: int = 32
    emb_window: int = 5
    emb_negatives: int = 5
    emb_epochs: int = 5
    emb_lr: float = 0.025
    emb_seed: int | None = 1
    emb_float32: bool = False


@dataclass
class ScheduleConfig:
    checkpoints: tuple = (0.0, 0.1, 0.5, 1.0)


@dataclass
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)

    @property
    def mode(self):
        return self.data.mode

    def with_mode(self, mode) -> "ExperimentConfig":
        cfg = dataclasses.replace(self, data=dataclasses.replace(self.data, mode=mode))
        return cfg

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["metrics"]["bleu_orders"] = list(d["metrics"]["bleu_orders"])
        d["schedule"]["checkpoints"] = list(d["schedule"]["checkpoints"])
        return d

    def fingerprint(self) -> str:
        return _fingerprint(self.to_dict())

    def seeds(self) -> dict:
        return {
            "data.split_seed": self.data.split_seed,
            "oracle.seed": self.oracle.seed,
            "oracle.sample_seed": self.oracle.sample_seed,
            "generator.sample_seed": self.generator.sample_seed,
            "metrics.self_bleu_seed": self.metrics.self_bleu_seed,
            "metrics.emb_seed": self.metrics.emb_seed,
        }

    def skipgram(self) -> _embsim.SkipGramConfig:
        m = self.metrics
        return _embsim.SkipGramConfig(m.emb_dim, m.emb_window, m.emb_negatives, m.emb_epochs,
                                      m.emb_lr, m.emb_seed)


_SECTIONS = {
    "data": DataConfig,
    "oracle": OracleConfig,
    "generator": GeneratorConfig,
    "metrics": MetricsConfig,
    "schedule": ScheduleConfig,
}


def _coerce(raw: str, default, name: str, annotation: str):
    raw = raw.strip()
    optional = "None" in annotation
    if optional and raw.lower() in ("", "none"):
        return None
    try:
        if "tuple" in annotation:
            parts = [p for p in raw.replace(",", " ").split() if p]
            kind = float if name == "checkpoints" else int
            return tuple(kind(p) for p in parts)
        if "bool" in annotation:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "int" in annotation:
            return int(raw)
        if "float" in annotation:
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {raw!r}") from None
    return raw


def load_config(path) -> ExperimentConfig:
    """Parse an INI experiment file; unknown sections or keys are errors."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    sections = {}
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{name}]")
    for name, cls in _SECTIONS.items():
        fields = {f.name: f for f in dataclasses.fields(cls)}
        values = {}
        if parser.has_section(name):
            for key, raw in parser.items(name):
                if key not in fields:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{name}]")
                f = fields[key]
                values[key] = _coerce(raw, f.default, key, str(f.type))
        sections[name] = cls(**values)
    cfg = ExperimentConfig(**sections)
    if cfg.data.input is not None and not Path(cfg.data.input).is_absolute():
        cfg.data.input = str((path.parent / cfg.data.input).resolve())
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    """Render ``cfg`` as an INI document that :func:`load_config` reads back."""
    out = io.StringIO()
    for name in _SECTIONS:
        out.write(f"[{name}]\n")
        for key, value in dataclasses.asdict(getattr(cfg, name)).items():
            if value is None:
                value = "none"
            elif isinstance(value, (tuple, list)):
                value = ", ".join(str(v) for v in value)
            out.write(f"{key} = {value}\n")
        out.write("\n")
    return out.getvalue()


def validate(cfg: ExperimentConfig) -> None:
    """Reject a config before any compute starts."""
    d, o, g, m, s = cfg.data, cfg.oracle, cfg.generator, cfg.metrics, cfg.schedule
    if d.mode not in ("synthetic", "real"):
        raise ConfigError(f"mode must be 'synthetic' or 'real', got {d.mode!r}")
    missing = [k for k, v in cfg.seeds().items() if v is None]
    if missing:
        raise ConfigError(f"seeds must be explicit; missing: {', '.join(missing)}")
    if not 0.0 < d.split_ratio < 1.0:
        raise ConfigError("data.split_ratio must lie in (0, 1)")
    if d.policy not in _corpus.POLICIES:
        raise ConfigError(f"unknown tokenization policy {d.policy!r}")
    if d.mode == "real":
        src = Path(d.input) if d.input else sample_corpus_path()
        if not src.is_file():
            raise ConfigError(f"input corpus not found: {src}")
        if d.max_sentences < 2:
            raise ConfigError("data.max_sentences must be >= 2")
    if min(o.vocab_size, o.embed_dim, o.hidden_dim, o.length, o.num_samples, o.test_samples) < 1:
        raise ConfigError("oracle sizes must be positive")
    if o.vocab_size < 2:
        raise ConfigError("oracle.vocab_size must be >= 2")
    if g.order is not None and g.order < 1:
        raise ConfigError("generator.order must be >= 1")
    if not g.delta > 0:
        raise ConfigError("generator.delta must be positive")
    if g.generated_size is not None and g.generated_size < 2:
        raise ConfigError("generator.generated_size must be >= 2")
    if g.max_length is not None and g.max_length < 1:
        raise ConfigError("generator.max_length must be >= 1")
    if not m.bleu_orders or any(not 1 <= n <= 5 for n in m.bleu_orders):
        raise ConfigError("metrics.bleu_orders must be a non-empty list within 1..5")
    _bleu.BleuConfig(max(m.bleu_orders), m.smoothing)
    cfg.skipgram()
    if not s.checkpoints:
        raise ConfigError("schedule.checkpoints is empty")
    if any(not 0.0 <= f <= 1.0 for f in s.checkpoints) or list(s.checkpoints) != sorted(set(s.checkpoints)):
        raise ConfigError("schedule.checkpoints must be strictly increasing fractions in [0, 1]")


def _fingerprint(obj) -> str:
    raw = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(raw.encode()).hexdigest()[:16]


def _entry(config_fp, metric, settings, value=None, nll=None, **inputs):
    """A metric value with the fingerprint of everything that produced it."""
    provenance = {"metric": metric, "settings": settings, "config": config_fp, **inputs}
    out = {"fingerprint": _fingerprint(provenance)}
    if nll is not None:
        out.update(nll.as_dict())
        out["value"] = nll.mean
    else:
        out["value"] = float(value)
    out["settings"] = settings
    return out


class _Timer:
    def __init__(self):
        self.stages = {}

    def __call__(self, name):
        timer = self

        class _Stage:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.stages[name] = timer.stages.get(name, 0.0) + time.perf_counter() - self.t0

        return _Stage()


def _new_report(cfg: ExperimentConfig) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "mode": cfg.mode,
        "config": cfg.to_dict(),
        "config_fingerprint": cfg.fingerprint(),
        "environment": {
            "texeval_version": __version__,
            "numpy_version": np.__version__,
            "threads": thread_count(),
            "seeds": cfg.seeds(),
        },
        "disclosures": {
            "log_base": "natural",
            "nll_definition": "mean over sentences of the summed per-token negative log-likelihood",
            "oracle_sizes": f"E={cfg.oracle.embed_dim}, H={cfg.oracle.hidden_dim} (chosen convention)",
            "oracle_start": "START embedding with zero initial state",
            "bleu_aggregation": "mean sentence BLEU, each hypothesis against the full reference corpus",
            "bleu_weights": "uniform over orders 1..n",
            "embsim_vectors": "input vectors; skip-gram retrained on each corpus with identical settings",
            "checkpoint_fraction_0": "untrained model, uniform over the vocabulary",
            "generated_size": "test-set size unless generator.generated_size is set",
        },
        "data": {},
        "checkpoints": [],
        "references": {},
        "timing": {},
    }


def _fraction_slice(train: _corpus.Corpus, fraction: float) -> _corpus.Corpus:
    n = int(math.floor(fraction * len(train) + 0.5))
    return train.replace(train.sequences[:max(n, 1)])


def _checkpoint_generator(train, fraction, order, delta):
    if fraction == 0.0:
        return _gen.UniformGenerator(train.vocab)
    return _gen.train_ngram_mle(_fraction_slice(train, fraction), order, delta)


def run_synthetic(cfg: ExperimentConfig | None = None) -> dict:
    """Oracle-data pipeline; returns a report dict."""
    cfg = (cfg or ExperimentConfig()).with_mode("synthetic")
    validate(cfg)
    o, g = cfg.oracle, cfg.generator
    order = g.order or 2
    timer = _Timer()
    report = _new_report(cfg)
    cfp = report["config_fingerprint"]

    with timer("oracle"):
        model = _oracle.init_oracle(o.seed, o.vocab_size, o.embed_dim, o.hidden_dim)
        vocab = _corpus.Vocabulary.synthetic(o.vocab_size)
        train = _oracle.sample(model, o.num_samples, o.length, derive_seed(o.sample_seed, "train"), vocab)
        train = train.replace(split="train")
        test = _oracle.sample(model, o.test_samples, o.length, derive_seed(o.sample_seed, "test"), vocab)
        test = test.replace(split="test")
    gen_size = g.generated_size or len(test)
    max_length = g.max_length or o.length
    report["data"] = {
        "vocab_size": vocab.size,
        "sentence_length": o.length,
        "train_size": len(train),
        "test_size": len(test),
        "generated_size": gen_size,
        "oracle": model.describe(),
        "train_fingerprint": train.fingerprint(),
        "test_fingerprint": test.fingerprint(),
    }

    with timer("references"):
        ref = _nll.nll_oracle(model, test)
        report["references"]["oracle-samples"] = {
            "description": "held-out oracle samples scored by the oracle (entropy estimate)",
            "metrics": {"nll-oracle": _entry(cfp, "nll-oracle", {}, nll=ref,
                                             corpus=test.fingerprint(), oracle=model.fingerprint())},
        }

    for k, fraction in enumerate(cfg.schedule.checkpoints):
        with timer(f"checkpoint[{k}]"):
            gen = _checkpoint_generator(train, fraction, order, g.delta)
            generated = gen.sample(gen_size, max_length, derive_seed(g.sample_seed, "checkpoint", k),
                                   fixed_length=True)
            nll_o = _nll.nll_oracle(model, generated)
            nll_t = _nll.nll_test(gen, test)
            fp = gen.fingerprint()
            report["checkpoints"].append({
                "index": k,
                "fraction": fraction,
                "generator": gen.describe(),
                "generated_fingerprint": generated.fingerprint(),
                "metrics": {
                    "nll-oracle": _entry(cfp, "nll-oracle", {}, nll=nll_o, generator=fp,
                                         corpus=generated.fingerprint(), oracle=model.fingerprint()),
                    "nll-test": _entry(cfp, "nll-test", {}, nll=nll_t, generator=fp,
                                       corpus=test.fingerprint()),
                },
            })
    report["timing"] = {name: round(sec, 3) for name, sec in timer.stages.items()}
    return report


def _shuffle_tokens(c: _corpus.Corpus, seed) -> _corpus.Corpus:
    """Same sentence lengths and unigram counts, tokens permuted across the corpus."""
    flat = np.array([t for s in c.sequences for t in s], dtype=np.int64)
    flat = flat[make_rng(seed, "shuffle").permutation(flat.size)]
    out, pos = [], 0
    for s in c.sequences:
        out.append(tuple(flat[pos:pos + len(s)].tolist()))
        pos += len(s)
    return c.replace(out, split="generated")


def _real_metrics(cfg, cfp, generated, train, test, W_train, gen=None):
    m = cfg.metrics
    bcfg = _bleu.BleuConfig(max(m.bleu_orders), m.smoothing)
    orders = tuple(m.bleu_orders)
    bsettings = {"smoothing": m.smoothing}
    gfp = generated.fingerprint()
    out = {}
    for name, refs in (("train", train), ("test", test)):
        scores = _bleu.corpus_bleu_by_order(generated, refs, bcfg, orders)
        for n in orders:
            out[f"bleu-{n}/{name}"] = _entry(cfp, f"bleu-{n}", {**bsettings, "max_order": n},
                                             value=scores[n], hyps=gfp, refs=refs.fingerprint())
    sb = _bleu.self_bleu_by_order(generated, bcfg, orders, m.self_bleu_sample, m.self_bleu_seed)
    for n in orders:
        out[f"self-bleu-{n}"] = _entry(
            cfp, f"self-bleu-{n}",
            {**bsettings, "max_order": n, "sample": m.self_bleu_sample, "seed": m.self_bleu_seed},
            value=sb[n], corpus=gfp)
    sg = cfg.skipgram()
    dtype = np.float32 if m.emb_float32 else np.float64
    W_gen = _embsim.similarity_matrix(_embsim.train_skipgram(generated, config=sg), dtype)
    out["embsim"] = _entry(cfp, "embsim", {**dataclasses.asdict(sg), "float32": m.emb_float32},
                           value=_embsim.embsim(W_train, W_gen), real=train.fingerprint(), gen=gfp)
    if gen is not None:
        out["nll-test"] = _entry(cfp, "nll-test", {}, nll=_nll.nll_test(gen, test),
                                 generator=gen.fingerprint(), corpus=test.fingerprint())
    return out


def run_real(cfg: ExperimentConfig | None = None) -> dict:
    """Real-text pipeline; returns a report dict."""
    cfg = (cfg or ExperimentConfig()).with_mode("real")
    validate(cfg)
    d, g, m = cfg.data, cfg.generator, cfg.metrics
    order = g.order or 3
    timer = _Timer()
    report = _new_report(cfg)
    cfp = report["config_fingerprint"]

    with timer("ingest"):
        src = Path(d.input) if d.input else sample_corpus_path()
        tokens = _corpus.read_text(src, d.policy, limit=d.max_sentences)
        vocab = _corpus.build_vocab(tokens, d.min_count)
        kept = [[t for t in s if t in vocab] for s in tokens]
        kept = [s for s in kept if s]
        full = _corpus.corpus_from_tokens(kept, vocab, policy=d.policy, source=str(src))
        train, test = _corpus.split(full, d.split_ratio, d.split_seed)
    gen_size = g.generated_size or len(test)
    max_length = g.max_length or max(len(s) for s in train.sequences)
    report["data"] = {
        "source": src.name,
        "policy": d.policy,
        "sentences": len(full),
        "vocab_size": vocab.size,
        "train_size": len(train),
        "test_size": len(test),
        "generated_size": gen_size,
        "max_length": max_length,
        "vocab_fingerprint": vocab.fingerprint(),
        "train_fingerprint": train.fingerprint(),
        "test_fingerprint": test.fingerprint(),
    }

    sg = cfg.skipgram()
    dtype = np.float32 if m.emb_float32 else np.float64
    with timer("embed-train"):
        W_train = _embsim.similarity_matrix(_embsim.train_skipgram(train, config=sg), dtype)

    for k, fraction in enumerate(cfg.schedule.checkpoints):
        with timer(f"checkpoint[{k}]"):
            gen = _checkpoint_generator(train, fraction, order, g.delta)
            generated = gen.sample(gen_size, max_length, derive_seed(g.sample_seed, "checkpoint", k),
                                   fixed_length=False)
            report["checkpoints"].append({
                "index": k,
                "fraction": fraction,
                "generator": gen.describe(),
                "generated_fingerprint": generated.fingerprint(),
                "metrics": _real_metrics(cfg, cfp, generated, train, test, W_train, gen),
            })

    with timer("references"):
        degenerate = _gen.RepeatGenerator(vocab, train.sequences[0])
        deg_corpus = degenerate.sample(gen_size, max_length, 0)
        refs = report["references"]
        refs["degenerate"] = {
            "description": "single repeated training sentence (total mode collapse)",
            "metrics": _real_metrics(cfg, cfp, deg_corpus, train, test, W_train),
        }
        refs["test-data"] = {
            "description": "held-out real sentences in place of generated text",
            "metrics": _real_metrics(cfg, cfp, test.replace(split="generated"), train, test, W_train),
        }
        bcfg = _bleu.BleuConfig(max(m.bleu_orders), m.smoothing)
        sb = _bleu.self_bleu_by_order(train, bcfg, tuple(m.bleu_orders), m.self_bleu_sample,
                                      m.self_bleu_seed)
        refs["training-data"] = {
            "description": "diversity of the training half itself",
            "metrics": {
                f"self-bleu-{n}": _entry(cfp, f"self-bleu-{n}",
                                         {"smoothing": m.smoothing, "max_order": n,
                                          "sample": m.self_bleu_sample, "seed": m.self_bleu_seed},
                                         value=sb[n], corpus=train.fingerprint())
                for n in m.bleu_orders
            },
        }
        shuffled = _shuffle_tokens(test, derive_seed(d.split_seed, "shuffle"))
        W_shuf = _embsim.similarity_matrix(_embsim.train_skipgram(shuffled, config=sg), dtype)
        refs["shuffled-test"] = {
            "description": "held-out sentences with tokens permuted across the corpus",
            "metrics": {"embsim": _entry(cfp, "embsim", dataclasses.asdict(sg),
                                         value=_embsim.embsim(W_train, W_shuf),
                                         real=train.fingerprint(), gen=shuffled.fingerprint())},
        }
    report["timing"] = {name: round(sec, 3) for name, sec in timer.stages.items()}
    return report


def run_experiment(cfg: ExperimentConfig) -> dict:
    validate(cfg)
    return run_synthetic(cfg) if cfg.mode == "synthetic" else run_real(cfg)


def metric_sections(report: dict) -> bytes:
    """Canonical bytes of the parts of a report that must be reproducible."""
    part = {k: report[k] for k in METRIC_SECTIONS}
    return json.dumps(part, sort_keys=True, separators=(",", ":")).encode()


def check_report(report: dict) -> None:
    """Every metric value must carry a fingerprint."""
    groups = [c["metrics"] for c in report["checkpoints"]]
    groups += [r["metrics"] for r in report["references"].values()]
    for metrics in groups:
        for name, entry in metrics.items():
            if not isinstance(entry, dict) or not entry.get("fingerprint") or "value" not in entry:
                raise TexevalError(f"metric {name!r} lacks a value or fingerprint")
            if not math.isfinite(entry["value"]):
                raise TexevalError(f"metric {name!r} is not finite")


CSV_FIELDS = ("checkpoint", "fraction", "metric", "value", "stderr", "fingerprint")


def report_rows(report: dict):
    for c in report["checkpoints"]:
        for name, entry in c["metrics"].items():
            yield {
                "checkpoint": c["index"],
                "fraction": c["fraction"],
                "metric": name,
                "value": repr(float(entry["value"])),
                "stderr": repr(float(entry["stderr"])) if "stderr" in entry else "",
                "fingerprint": entry["fingerprint"],
            }


def emit_report(report: dict, path, format: str = "json") -> None:
    """Write the full report as JSON, or one CSV row per (checkpoint, metric)."""
    check_report(report)
    path = Path(path)
    try:
        if format == "json":
            path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        elif format == "csv":
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
                w.writeheader()
                w.writerows(report_rows(report))
        else:
            raise ConfigError(f"unknown report format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
