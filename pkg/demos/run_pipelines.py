"""
Running both experiment pipelines
=================================

The harness drives everything from one config: oracle data or real text,
an n-gram generator trained on growing slices of the training set, and a
report with a provenance fingerprint on every number. Scaled down here so
it finishes in seconds; drop the overrides for the default scale.
"""

import dataclasses
import tempfile
from pathlib import Path

from texeval import harness

cfg = harness.ExperimentConfig()
cfg = dataclasses.replace(
    cfg,
    oracle=dataclasses.replace(cfg.oracle, vocab_size=500, num_samples=2000, test_samples=1000),
    data=dataclasses.replace(cfg.data, max_sentences=3000),
    metrics=dataclasses.replace(cfg.metrics, emb_epochs=2),
)

synthetic = harness.run_synthetic(cfg)
for c in synthetic["checkpoints"]:
    m = c["metrics"]
    print(f"fraction {c['fraction']:.1f}: NLL-oracle {m['nll-oracle']['value']:8.3f}  "
          f"NLL-test {m['nll-test']['value']:8.3f}")
print("oracle entropy estimate:",
      round(synthetic["references"]["oracle-samples"]["metrics"]["nll-oracle"]["value"], 3))

real = harness.run_real(cfg)
final = real["checkpoints"][-1]["metrics"]
for n in cfg.metrics.bleu_orders:
    print(f"BLEU-{n} vs train {final[f'bleu-{n}/train']['value']:.3f}  "
          f"vs test {final[f'bleu-{n}/test']['value']:.3f}  "
          f"Self-BLEU {final[f'self-bleu-{n}']['value']:.3f}")
print("EmbSim:", round(final["embsim"]["value"], 4))
print("degenerate generator Self-BLEU-4:",
      real["references"]["degenerate"]["metrics"]["self-bleu-4"]["value"])

# the same config written as INI reproduces the run exactly
with tempfile.TemporaryDirectory() as tmp:
    ini = Path(tmp) / "experiment.ini"
    ini.write_text(harness.dump_config(cfg))
    again = harness.run_real(harness.load_config(ini))
    print("identical metric sections:", harness.metric_sections(again) == harness.metric_sections(real))
    harness.emit_report(real, Path(tmp) / "report.csv", "csv")
    print((Path(tmp) / "report.csv").read_text().splitlines()[1])
