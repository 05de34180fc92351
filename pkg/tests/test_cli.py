import json

import pytest

from jointparse import data_path
from jointparse.cli import InputError, main, read_raw_sentences

TINY = {"model.d_model": 8, "model.heads": 2, "model.d_ff": 8, "model.total_layers": 2, "model.shared_layers": 1,
        "model.d_word": 4, "model.d_char_emb": 3, "model.d_char_out": 4, "model.d_pos": 4,
        "model.d_span_hidden": 6, "model.d_arc": 5, "model.d_rel": 3, "train.batch_tokens": 120,
        "train.warmup_steps": 5}


def train_args(out, *extra, epochs=2):
    args = ["train", "--train-trees", str(data_path("toy32", "trees")),
            "--train-conll", str(data_path("toy32", "conll")), "--output-dir", str(out),
            "--epochs", str(epochs), "--seed", "1"]
    for k, v in TINY.items():
        args += ["--set", f"{k}={v}"]
    return args + list(extra)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(train_args(out, "--use-pos")) == 0
    return out


def test_train_writes_artifacts(trained):
    for name in ("model.ckpt", "train.log", "config.txt", "manifest.json"):
        assert (trained / name).is_file()
    manifest = json.loads((trained / "manifest.json").read_text())
    assert set(manifest) == {"config", "seed", "vocab_sha256", "checkpoint", "best_epoch", "dev_metrics"}
    assert manifest["seed"] == 1 and len(manifest["vocab_sha256"]) == 64
    assert set(manifest["dev_metrics"]["constituency"]) == {"LR", "LP", "F1"}
    assert set(manifest["dev_metrics"]["dependency"]) == {"UAS", "LAS"}
    assert manifest["config"]["model.d_model"] == 8
    lines = [json.loads(l) for l in (trained / "train.log").read_text().splitlines()]
    assert any("dev" in rec for rec in lines)


def test_const_mode_manifest_has_no_dependency(tmp_path):
    assert main(train_args(tmp_path, "--mode", "const", epochs=1)) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["dev_metrics"]["dependency"] is None
    assert manifest["dev_metrics"]["constituency"] is not None


def test_rerun_from_manifest_reproduces(trained, tmp_path):
    assert main(["train", "--manifest", str(trained / "manifest.json"), "--output-dir", str(tmp_path)]) == 0
    assert (tmp_path / "train.log").read_bytes() == (trained / "train.log").read_bytes()
    a = json.loads((trained / "manifest.json").read_text())
    b = json.loads((tmp_path / "manifest.json").read_text())
    assert a["dev_metrics"] == b["dev_metrics"] and a["vocab_sha256"] == b["vocab_sha256"]


def test_parse_and_eval(trained, tmp_path, capsys):
    gold = data_path("toy32", "conll").read_text().split("\n\n")[:3]
    lines = []
    for block in gold:
        rows = [r.split("\t") for r in block.strip().splitlines()]
        lines.append(" ".join(f"{r[1]}/{r[3]}" for r in rows))
    (tmp_path / "in.txt").write_text("\n".join(lines) + "\n")
    (tmp_path / "gold.conll").write_text("\n\n".join(gold) + "\n\n")
    assert main(["parse", "--checkpoint", str(trained / "model.ckpt"), "--input", str(tmp_path / "in.txt"),
                 "--trees-out", str(tmp_path / "out.trees"), "--conll-out", str(tmp_path / "out.conll")]) == 0
    assert len((tmp_path / "out.trees").read_text().splitlines()) == 3
    capsys.readouterr()
    code = main(["eval", "--pred-conll", str(tmp_path / "out.conll"), "--gold-conll", str(tmp_path / "gold.conll"),
                 "--json", str(tmp_path / "m.json")])
    assert code == 0
    assert "UAS" in capsys.readouterr().out
    assert json.loads((tmp_path / "m.json").read_text())["sentences"] == 3


def test_parse_empty_input(trained, tmp_path):
    (tmp_path / "empty.txt").write_text("")
    assert main(["parse", "--checkpoint", str(trained / "model.ckpt"), "--input", str(tmp_path / "empty.txt"),
                 "--trees-out", str(tmp_path / "o.trees"), "--conll-out", str(tmp_path / "o.conll")]) == 0
    assert (tmp_path / "o.trees").read_text() == "" and (tmp_path / "o.conll").read_text() == ""


def test_parse_requires_tags_when_model_uses_pos(trained, tmp_path, capsys):
    (tmp_path / "raw.txt").write_text("the/DT cat/NN\nthe dog slept\n")
    code = main(["parse", "--checkpoint", str(trained / "model.ckpt"), "--input", str(tmp_path / "raw.txt")])
    assert code == 2
    assert "line 2" in capsys.readouterr().err


def test_read_raw_sentences():
    sents = read_raw_sentences("a/DT b/NN\n\nc d\n", need_pos=False)
    assert [s.tags for s in sents] == [["DT", "NN"], ["X", "X"]]
    with pytest.raises(InputError, match="line 3"):
        read_raw_sentences("a/DT b/NN\n\nc d\n", need_pos=True)


def test_eval_missing_file(tmp_path, capsys):
    code = main(["eval", "--pred-trees", str(tmp_path / "nope"), "--gold-trees", str(tmp_path / "nope")])
    assert code == 2
    assert "no such file" in capsys.readouterr().err


def test_eval_misaligned_names_sentence(tmp_path, capsys):
    (tmp_path / "p").write_text("(S (A a) (B b))\n")
    (tmp_path / "g").write_text("(S (A a) (B c))\n")
    assert main(["eval", "--pred-trees", str(tmp_path / "p"), "--gold-trees", str(tmp_path / "g")]) == 2
    assert "sentence 1" in capsys.readouterr().err


def test_shared_layers_above_total_is_config_error(tmp_path, capsys):
    assert main(train_args(tmp_path, "--shared-layers", "5", epochs=1)) == 2
    assert "shared" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["bogus"], ["train", "--mode", "both"], ["eval", "--profile", "x"]])
def test_usage_errors_exit_2(argv):
    assert main(argv) == 2


def test_missing_training_data(tmp_path):
    assert main(["train", "--output-dir", str(tmp_path)]) == 2


def test_oracle_check_and_injected_fault(capsys):
    assert main(["oracle-check", "--seeds", "10", "--max-n", "5"]) == 0
    assert "oracle-check: PASS" in capsys.readouterr().out
    assert main(["oracle-check", "--seeds", "10", "--max-n", "5", "--inject-fault", "eisner-split"]) == 1
    out = capsys.readouterr().out
    assert "FAIL eisner" in out and "oracle-check: FAIL" in out
    assert main(["oracle-check", "--max-n", "40"]) == 2
