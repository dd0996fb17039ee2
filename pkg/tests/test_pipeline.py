"""End-to-end tests of the command-line pipeline on a small synthetic corpus."""

import json

import pytest

from app.main import main
from app.services.neuralnet import load_checkpoint, save_checkpoint
from app.services.storage import iter_csv_rows, read_config_digest
from app.services.vectorize import Vocabulary, export_vocab, load_vocab
from tests.conftest import FAST_OVERRIDES, write_csv


def cli(run_dir, *args: str) -> int:
    flags = []
    for override in FAST_OVERRIDES:
        flags += ["--set", override]
    return main([*args, "--out", str(run_dir), "--seed", "5", *flags])


@pytest.fixture
def prepared(tmp_path):
    run_dir = tmp_path / "run"
    assert cli(run_dir, "synth", "--n", "210") == 0
    assert cli(run_dir, "prep") == 0
    return run_dir


class TestDataCommands:
    def test_synth_is_deterministic(self, tmp_path):
        assert cli(tmp_path / "a", "synth", "--n", "50") == 0
        assert cli(tmp_path / "b", "synth", "--n", "50") == 0
        first = (tmp_path / "a" / "synthetic.csv").read_text()
        assert first == (tmp_path / "b" / "synthetic.csv").read_text()
        assert len(first.splitlines()) == 51

    def test_prep_artifacts(self, prepared):
        digest = (prepared / "vocab.txt").read_text().splitlines()[0].split("=", 1)[1]
        for name in ("corpus.csv", "class_counts.csv", "length_hist.csv"):
            assert read_config_digest(prepared / name) == digest
        rows = list(iter_csv_rows((prepared / "corpus.csv").read_text()))
        splits = {row["split"] for row in rows}
        assert splits == {"train", "test"}
        assert len(rows) == 210
        counts = {row["label"]: int(row["count"]) for row in iter_csv_rows((prepared / "class_counts.csv").read_text())}
        assert sum(counts.values()) == 210
        assert (prepared / "effective_config.txt").exists()

    def test_tfidf_and_stats(self, prepared):
        assert cli(prepared, "tfidf") == 0
        assert cli(prepared, "stats") == 0
        idf = list(iter_csv_rows((prepared / "idf.csv").read_text()))
        assert all(float(row["idf"]) >= 1.0 for row in idf)
        assert (prepared / "tfidf_train.csv").exists()
        assert (prepared / "tfidf_test.csv").exists()

    def test_prep_with_bad_label(self, tmp_path):
        source = write_csv(tmp_path / "bad.csv", [(1, "i feel fine", "Normal"), (2, "who knows", "Unknown")])
        assert cli(tmp_path / "run", "prep", "--input", str(source)) == 1

    def test_prep_needs_input(self, tmp_path):
        assert cli(tmp_path / "run", "prep") == 1


class TestNetworkCommands:
    def test_missing_transfer_setup_names_producer(self, prepared, caplog):
        assert cli(prepared, "train-teacher") == 0
        assert cli(prepared, "train-student") == 1
        assert "algorithm1" in caplog.text

    def test_student_after_vocabulary_change(self, prepared, caplog):
        assert cli(prepared, "train-teacher") == 0
        assert cli(prepared, "algorithm1") == 0
        vocab_path = prepared / "vocab.txt"
        digest = read_config_digest(vocab_path)
        rebuilt = Vocabulary.from_tokens(list(load_vocab(vocab_path).tokens[2:])[:-1])
        vocab_path.write_text(export_vocab(rebuilt, digest))
        assert cli(prepared, "train-student") == 1
        assert "rerun train-teacher and algorithm1" in caplog.text

    def test_full_pipeline(self, prepared):
        assert cli(prepared, "train-teacher") == 0
        assert cli(prepared, "algorithm1") == 0
        assert cli(prepared, "train-student") == 0
        assert cli(prepared, "evaluate", "--model", "student") == 0

        metrics = json.loads((prepared / "student" / "metrics.json").read_text())
        assert 0.0 <= metrics["accuracy"] <= 1.0
        assert metrics["config_digest"]
        gmm_report = json.loads((prepared / "gmm_report.json").read_text())
        assert gmm_report["num_components"] == 7
        log_rows = list(iter_csv_rows((prepared / "student" / "training_log.csv").read_text()))
        assert [int(row["epoch"]) for row in log_rows] == [1, 2]
        confusion = (prepared / "teacher" / "confusion.csv").read_text().splitlines()
        assert len(confusion) == 1 + 1 + 7

    def test_evaluate_rejects_other_label_set(self, prepared):
        assert cli(prepared, "train-teacher") == 0
        path = prepared / "teacher" / "teacher.ckpt"
        checkpoint = load_checkpoint(path)
        save_checkpoint(checkpoint.params, path, {**checkpoint.metadata, "labels": ["a", "b"]})
        assert cli(prepared, "evaluate", "--model", "teacher") == 1

    def test_evaluate_without_checkpoint(self, prepared):
        assert cli(prepared, "evaluate", "--model", "teacher") == 1


class TestExperimentCommands:
    def test_baseline(self, prepared):
        assert cli(prepared, "baseline") == 0
        report = json.loads((prepared / "baseline_metrics.json").read_text())
        assert [model["model"] for model in report["models"]] == ["logreg", "naive_bayes"]
        assert (prepared / "baseline_top_features.csv").exists()

    @pytest.mark.slow
    def test_kfold(self, prepared):
        assert cli(prepared, "kfold", "--k", "2") == 0
        summary = json.loads((prepared / "kfold_summary.json").read_text())
        assert summary["k"] == 2
        assert len(summary["folds"]) == 2


class TestCliErrors:
    def test_bad_override(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path), "--set", "trainer.lr=-1"]) == 1

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2


class TestReproducibility:
    def test_same_seed_metrics_are_byte_identical(self, tmp_path):
        outputs = []
        for name in ("a", "b"):
            run_dir = tmp_path / name
            assert cli(run_dir, "synth", "--n", "140") == 0
            assert cli(run_dir, "prep") == 0
            assert cli(run_dir, "train-teacher") == 0
            outputs.append((run_dir / "teacher" / "metrics.json").read_bytes())
        assert outputs[0] == outputs[1]
