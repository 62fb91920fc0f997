import json
import math

import pytest

from conftest import small_config
from texeval import corpus as C
from texeval import harness as Hn
from texeval.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def ids(tmp_path):
    def write(name, lines):
        p = tmp_path / name
        p.write_text("".join(" ".join(map(str, s)) + "\n" for s in lines))
        return p
    return write


def test_bleu_identity(capsys, ids):
    p = ids("a.ids", [[2, 3, 4, 5], [5, 4, 3, 2]])
    code, out = run(capsys, "bleu", "--hyp", p, "--ref", p)
    assert code == 0 and out["value"] == 1.0 and out["metric"] == "bleu-4"


def test_self_bleu(capsys, ids):
    p = ids("a.ids", [[2, 3, 4]] * 5)
    code, out = run(capsys, "self-bleu", "--corpus", p, "--max-order", "3")
    assert code == 0 and out["value"] == 1.0


def test_embsim_same_corpus(capsys, ids):
    p = ids("a.ids", [[2, 3, 4, 5, 2, 3]] * 20 + [[6, 7, 6, 7]] * 20)
    code, out = run(capsys, "embsim", "--real", p, "--gen", p, "--dim", 4, "--epochs", 1)
    assert code == 0 and abs(out["value"]) <= 1e-9


def test_oracle_gen_and_nll(capsys, tmp_path):
    model, samples = tmp_path / "o.bin", tmp_path / "o.ids"
    code, out = run(capsys, "oracle", "gen", "--seed", 3, "--vocab-size", 30, "--embed-dim", 4,
                    "--hidden-dim", 4, "--out", model, "--samples", samples, "--count", 50,
                    "--length", 6)
    assert code == 0 and out["vocab_size"] == 30 and model.exists()
    code, out = run(capsys, "nll-oracle", "--oracle", model, "--gen", samples)
    assert code == 0 and out["count"] == 50 and 0 < out["mean"] < 6 * math.log(30) * 3


def test_train_generate_nll_test(capsys, tmp_path):
    text = tmp_path / "t.txt"
    text.write_text("A cat sat\nthe cat ran\na dog sat\n" * 10)
    vocab, model, gen = tmp_path / "v.txt", tmp_path / "m.ngram", tmp_path / "g.ids"
    code, out = run(capsys, "train", "--corpus", text, "--text", "--vocab-out", vocab,
                    "--order", 2, "--out", model)
    assert code == 0 and out["order"] == 2
    code, out = run(capsys, "generate", "--model", model, "--vocab", vocab, "--count", 20,
                    "--seed", 1, "--out", gen)
    assert code == 0 and out["count"] == 20
    code, out = run(capsys, "nll-test", "--model", model, "--vocab", vocab, "--test", gen)
    assert code == 0 and out["mean"] > 0


def test_nll_test_from_logprobs(capsys, ids, tmp_path):
    test = ids("t.ids", [[2, 3], [4]])
    lp = tmp_path / "lp.txt"
    lp.write_text("-1 -1\n-2\n")
    code, out = run(capsys, "nll-test", "--logprobs", lp, "--test", test, "--fixed-length")
    assert code == 0 and out["mean"] == 2.0


def test_misaligned_logprobs_exit_2(capsys, ids, tmp_path):
    test = ids("t.ids", [[2, 3], [4]])
    lp = tmp_path / "lp.txt"
    lp.write_text("-1\n")
    code, _ = run(capsys, "nll-test", "--logprobs", lp, "--test", test, "--fixed-length")
    assert code == 2


def test_bad_id_file_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.ids"
    bad.write_text("2 three\n")
    assert main(["bleu", "--hyp", str(bad), "--ref", str(bad)]) == 1
    captured = capsys.readouterr()
    assert captured.out == "" and "bad.ids:1" in captured.err


def test_parse_error_message_has_line(capsys, tmp_path):
    bad = tmp_path / "bad.ids"
    bad.write_text("2 3\n2 x\n")
    main(["self-bleu", "--corpus", str(bad)])
    assert "bad.ids:2" in capsys.readouterr().err


def test_usage_error_exit_1(capsys):
    assert main(["bleu"]) == 1
    assert main(["no-such-command"]) == 1


def test_missing_file_exit_2(capsys, tmp_path):
    code, _ = run(capsys, "nll-oracle", "--oracle", tmp_path / "none.bin", "--gen", tmp_path / "x")
    assert code == 2


def test_experiment_writes_reports(capsys, tmp_path):
    cfg_path = tmp_path / "exp.ini"
    cfg_path.write_text(Hn.dump_config(small_config("synthetic")))
    out_dir = tmp_path / "out"
    code, out = run(capsys, "experiment", "--config", cfg_path, "--out", out_dir)
    assert code == 0 and out["mode"] == "synthetic"
    for name in ("report.json", "report.csv", "config.ini"):
        assert (out_dir / name).exists()
    assert Hn.load_config(out_dir / "config.ini").fingerprint() == out["config_fingerprint"]


def test_experiment_bad_config_exit_1(capsys, tmp_path):
    cfg_path = tmp_path / "exp.ini"
    cfg_path.write_text("[oracle]\nseed = none\n")
    code, _ = run(capsys, "experiment", "--config", cfg_path, "--out", tmp_path / "o")
    assert code == 1


def test_vocab_option_uses_given_vocabulary(capsys, tmp_path):
    v = C.build_vocab([["a", "b", "c"]])
    vp = tmp_path / "v.txt"
    C.save_vocab(v, vp)
    p = tmp_path / "a.ids"
    p.write_text("2 3 4\n4 3 2\n")
    code, out = run(capsys, "self-bleu", "--corpus", p, "--vocab", vp, "--max-order", 1)
    assert code == 0 and out["value"] == 1.0
