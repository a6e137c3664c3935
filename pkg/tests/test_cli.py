import json
import sys

import pytest

from lotus import corpus
from lotus.cli import main
from lotus.synthetic import LATENT_CUE_MAP, latent_cue_dataset

from conftest import write_split_pair


@pytest.fixture
def exp_dir(tmp_path):
    train, test = write_split_pair(tmp_path, latent_cue_dataset(80, 5), 60, "lc")
    cfg = {
        "train_path": train.name,
        "test_path": test.name,
        "backend": {"backend_id": "latent-stub", "kind": "stub", "cue_map": LATENT_CUE_MAP},
        "train": {"feature_dim": 4096, "epochs": 5},
        "run_seeds": [0, 1],
    }
    (tmp_path / "config.json").write_text(json.dumps(cfg))
    return tmp_path


def test_no_arguments_exits_1(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_and_flag_exit_1():
    assert main(["frobnicate"]) == 1
    assert main(["stats", "--bogus"]) == 1


def test_stats_json(capsys, appendix_dataset, tmp_path):
    path = tmp_path / "d.csv"
    corpus.write_dataset(list(appendix_dataset), path)
    assert main(["stats", "--data", str(path), "--split", "test"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"split": "test", "total": 6,
                   "counts": {"anger": 3, "fear": 3, "joy": 1, "sadness": 3, "surprise": 1}}


def test_bad_data_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("id,text,anger,fear,joy,sadness,surprise\na,x,0,0,2,0,0\n")
    assert main(["stats", "--data", str(path)]) == 1
    assert "row 2" in capsys.readouterr().err


def test_sample_seed(tmp_path, exp_dir):
    out = tmp_path / "seed"
    assert main(["sample-seed", "--data", str(exp_dir / "lc_train.csv"), "--n", "10", "--seed", "1",
                 "--out", str(out)]) == 0
    sample = corpus.parse_dataset(out / "seed_corpus.csv", "train")
    assert len(sample) == 10


def test_explain_then_export(tmp_path, exp_dir):
    out = tmp_path / "ex"
    cfg = str(exp_dir / "config.json")
    assert main(["explain", "--config", cfg, "--data", str(exp_dir / "lc_train.csv"), "--out", str(out)]) == 0
    lines = (out / "explanations.jsonl").read_text().splitlines()
    assert len(lines) == 60
    assert json.loads(lines[0])["backend_id"] == "latent-stub"
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["cache_path"] == str(out / "explanations_cache.jsonl")

    assert main(["export-finetune", "--config", cfg, "--data", str(exp_dir / "lc_train.csv"),
                 "--explanations", str(out / "explanations.jsonl"), "--out", str(out)]) == 0
    job = json.loads((out / "finetune_job.json").read_text())
    assert len(job["pairs"]) == 60
    assert job["hyperparameters"]["train_steps"] == 30


def test_train_predict_evaluate(tmp_path, exp_dir, capsys):
    out = tmp_path / "m"
    cfg = str(exp_dir / "config.json")
    assert main(["train", "--config", cfg, "--out", str(out), "--set", "train.epochs=4"]) == 0
    assert json.loads((out / "resolved_config.json").read_text())["train"]["epochs"] == 4
    assert main(["explain", "--config", cfg, "--data", str(exp_dir / "lc_test.csv"), "--out", str(out)]) == 0
    assert main(["predict", "--config", cfg, "--model", str(out / "model.json"), "--out", str(out)]) == 0
    assert main(["evaluate", "--data", str(exp_dir / "lc_test.csv"),
                 "--predictions", str(out / "predictions.jsonl")]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert set(metrics) >= {"macro", "micro", "per_label"}


def test_predict_without_cached_explanations_fails(tmp_path, exp_dir):
    out = tmp_path / "m"
    cfg = str(exp_dir / "config.json")
    assert main(["train", "--config", cfg, "--mode", "text_only", "--out", str(out)]) == 0
    assert main(["predict", "--config", cfg, "--model", str(out / "model.json"),
                 "--set", f"cache_path={tmp_path / 'empty.jsonl'}"]) == 1


def test_run_and_report(tmp_path, exp_dir, capsys):
    out = tmp_path / "run"
    assert main(["run", "--config", str(exp_dir / "config.json"), "--out", str(out)]) == 0
    md = capsys.readouterr().out
    assert "Text Only (reference)" in md and "Text + Exp (latent-stub) + reference" in md
    for mode in ("text_only", "text_plus_explanation"):
        for name in ("predictions_0.jsonl", "predictions_1.jsonl", "metrics_0.json", "aggregate.json"):
            assert (out / mode / name).exists()
    for name in ("report.md", "report.csv", "report_per_emotion.csv", "errors_anger.md", "resolved_config.json"):
        assert (out / name).exists()
    assert main(["report", "--out", str(out), "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("Method,Macro P,")


def test_backend_failure_exits_2(tmp_path, exp_dir):
    script = tmp_path / "fail.py"
    script.write_text("import sys\nsys.exit(1)\n")
    cfg = json.loads((exp_dir / "config.json").read_text())
    cfg["backends"] = {"broken": {"backend_id": "broken", "kind": "external-command",
                                  "command": [sys.executable, str(script)]}}
    (exp_dir / "config.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(exp_dir / "config.json"), "--backend", "broken",
                 "--out", str(tmp_path / "r")]) == 2
    assert main(["run", "--config", str(exp_dir / "config.json"), "--backend", "absent",
                 "--out", str(tmp_path / "r")]) == 1


def test_bad_override_exits_1(exp_dir, tmp_path):
    assert main(["train", "--config", str(exp_dir / "config.json"), "--set", "oops", "--out", str(tmp_path)]) == 1
