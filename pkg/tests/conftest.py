import dataclasses
import sys

from texeval.harness import ExperimentConfig


def small_config(mode="synthetic", **data_overrides) -> ExperimentConfig:
    """Scaled-down pipeline settings so harness tests run in seconds."""
    cfg = ExperimentConfig()
    cfg = dataclasses.replace(
        cfg,
        data=dataclasses.replace(cfg.data, mode=mode, max_sentences=600, **data_overrides),
        oracle=dataclasses.replace(cfg.oracle, vocab_size=200, embed_dim=8, hidden_dim=8,
                                   length=8, num_samples=300, test_samples=200),
        metrics=dataclasses.replace(cfg.metrics, bleu_orders=(2, 3), emb_dim=8, emb_epochs=1),
        schedule=dataclasses.replace(cfg.schedule, checkpoints=(0.0, 0.5, 1.0)),
    )
    return cfg


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
