"""Tests for the run-directory store and the binary container."""

import json

import numpy as np
import pytest

from app.core.exceptions import FormatError, MissingArtifactError
from app.services.distill import (
    FEATURES_FILE,
    GMM_FILE,
    TeacherFeatureStore,
    load_feature_store,
    run_algorithm1,
    save_feature_store,
)
from app.services.gmm import GmmModel, load_gmm, save_gmm
from app.services.neuralnet import Checkpoint, init_params
from app.services.storage import (
    CHECKPOINT_MAGIC,
    GMM_MAGIC,
    LocalArtifactStore,
    decode_container,
    encode_container,
    iter_csv_rows,
    read_config_digest,
    render_csv,
)
from app.services.trainer import make_batch, network_config_for


class TestLocalArtifactStore:
    def test_require_names_producer(self, tmp_path):
        store = LocalArtifactStore(tmp_path, "abc")
        with pytest.raises(MissingArtifactError, match="run `algorithm1` first"):
            store.require("gmm.bin", "algorithm1")

    def test_missing_artifact_is_validation_error(self, tmp_path):
        store = LocalArtifactStore(tmp_path, "abc")
        with pytest.raises(MissingArtifactError) as excinfo:
            store.require("corpus.csv", "prep")
        assert excinfo.value.exit_code == 1
        assert excinfo.value.producer == "prep"

    def test_csv_carries_digest_line(self, tmp_path):
        store = LocalArtifactStore(tmp_path, "feedbeef")
        store.write_csv("sub/table.csv", ["a", "b"], [[1, 2], [3, 4]])
        path = tmp_path / "sub" / "table.csv"
        assert read_config_digest(path) == "feedbeef"
        rows = list(iter_csv_rows(path.read_text()))
        assert rows == [{"a": "1", "b": "2"}, {"a": "3", "b": "4"}]

    def test_json_gets_digest_and_sorted_keys(self, tmp_path):
        store = LocalArtifactStore(tmp_path, "d1")
        store.write_json("report.json", {"z": 1, "a": 2})
        text = (tmp_path / "report.json").read_text()
        assert json.loads(text) == {"a": 2, "config_digest": "d1", "z": 1}
        assert text.index('"a"') < text.index('"z"')

    def test_comment_lines_inside_quoted_fields_survive(self):
        text = render_csv(["id", "text"], [[1, "first\n# not a comment"]], "d")
        rows = list(iter_csv_rows(text))
        assert rows[0]["text"] == "first\n# not a comment"


class TestContainer:
    def test_round_trip_keeps_integer_arrays(self):
        arrays = {"ids": np.array([3, 1, 2]), "x": np.arange(6, dtype=np.float64).reshape(2, 3)}
        content = encode_container(GMM_MAGIC, "demo", arrays, dtype="float64", header={"note": "hi"})
        payload = decode_container(content, GMM_MAGIC)
        assert payload.kind == "demo"
        assert payload.header["note"] == "hi"
        assert payload.arrays["ids"].dtype == np.int64
        np.testing.assert_array_equal(payload.arrays["x"], arrays["x"])

    def test_wrong_magic(self):
        content = encode_container(GMM_MAGIC, "demo", {"x": np.zeros(2)}, dtype="float64", header={})
        with pytest.raises(FormatError, match="not a LGN1 container"):
            decode_container(content, CHECKPOINT_MAGIC)

    def test_truncated_blob(self):
        content = encode_container(CHECKPOINT_MAGIC, "demo", {"x": np.zeros(4)}, dtype="float32", header={})
        with pytest.raises(FormatError, match="truncated"):
            decode_container(content[:-3], CHECKPOINT_MAGIC)

    def test_trailing_bytes(self):
        content = encode_container(CHECKPOINT_MAGIC, "demo", {"x": np.zeros(4)}, dtype="float32", header={})
        with pytest.raises(FormatError, match="trailing"):
            decode_container(content + b"\x00\x00", CHECKPOINT_MAGIC)

    def test_unsupported_dtype(self):
        with pytest.raises(FormatError):
            encode_container(CHECKPOINT_MAGIC, "demo", {"x": np.zeros(1)}, dtype="float16", header={})


class TestBinaryArtifactDigests:
    def test_feature_store_keeps_digests(self, tmp_path):
        store = TeacherFeatureStore(
            ids=np.array([4, 9], dtype=np.int64),
            matrix=np.arange(6, dtype=np.float64).reshape(2, 3),
            latent_dim=1,
            checkpoint_digest="ckpt",
            vocab_digest="vocab",
            config_digest="cfg",
        )
        path = tmp_path / "teacher_features.bin"
        save_feature_store(store, path)
        loaded = load_feature_store(path)
        assert (loaded.checkpoint_digest, loaded.vocab_digest, loaded.config_digest) == ("ckpt", "vocab", "cfg")
        assert loaded.ids.tolist() == [4, 9]

    def test_gmm_keeps_config_digest(self, tmp_path):
        model = GmmModel(
            weights=np.array([1.0]),
            means=np.zeros((1, 2)),
            variances=np.ones((1, 2)),
            config_digest="cfg",
        )
        path = tmp_path / "gmm.bin"
        save_gmm(model, path)
        assert load_gmm(path).config_digest == "cfg"

    def test_transfer_setup_stamps_run_digest(self, fast_config, synthetic_corpus, synthetic_vocab):
        batch = make_batch(synthetic_corpus, synthetic_vocab, fast_config.vocab.max_len)
        params = init_params(network_config_for(fast_config, len(synthetic_vocab)), seed=0)
        artifacts = LocalArtifactStore(fast_config.output_dir, fast_config.digest())
        run_algorithm1(Checkpoint(params=params), batch, synthetic_vocab, fast_config, artifacts=artifacts)

        store = load_feature_store(artifacts.path(FEATURES_FILE))
        gmm = load_gmm(artifacts.path(GMM_FILE))
        assert store.config_digest == fast_config.digest()
        assert store.vocab_digest == synthetic_vocab.digest()
        assert gmm.config_digest == fast_config.digest()
        assert json.loads(artifacts.path("gmm_report.json").read_text())["config_digest"] == fast_config.digest()
