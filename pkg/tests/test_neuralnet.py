"""Tests for the dual network, optimizer, checkpoints and embedding loading."""

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError, DivergenceError, FormatError, ShapeError, StateError
from app.domain.enums import ModelMode
from app.services.neuralnet import (
    Gradients,
    NetworkConfig,
    Parameters,
    TokenBatch,
    backward,
    decode_checkpoint,
    encode_checkpoint,
    forward,
    init_params,
    load_checkpoint,
    load_text_embeddings,
    reconstruction_target,
    save_checkpoint,
    sgd_step,
)
from app.services.vectorize import Vocabulary, encode


class TestNetworkConfig:
    def test_feature_dim(self, tiny_network_config):
        assert tiny_network_config.feature_dim == 4 + 3

    def test_rejects_single_class(self):
        with pytest.raises(ConfigurationError):
            NetworkConfig(vocab_size=5, num_classes=1, max_len=4)

    def test_rejects_non_positive(self):
        with pytest.raises(ConfigurationError, match="embed_dim"):
            NetworkConfig(vocab_size=5, num_classes=2, max_len=4, embed_dim=0)


class TestForward:
    def test_output_shapes(self, tiny_params, token_ids):
        ids, lengths = token_ids
        out = forward(tiny_params, ids, lengths, ModelMode.TRAIN)
        assert out.latent.shape == (3, 4)
        assert out.logits.shape == (3, 3)
        assert out.reconstruction.shape == (3, 4)
        assert out.features.shape == (3, 7)

    def test_all_pad_is_finite(self, tiny_params):
        out = forward(tiny_params, np.zeros((2, 6), dtype=np.int64), np.zeros(2, dtype=np.int64))
        assert np.all(np.isfinite(out.features))

    def test_zero_decoders_give_bias_logits(self, tiny_params, token_ids):
        ids, lengths = token_ids
        values = dict(tiny_params.values)
        values["classifier.weight"] = np.zeros_like(values["classifier.weight"])
        values["classifier.bias"] = np.zeros_like(values["classifier.bias"])
        out = forward(Parameters(tiny_params.config, values), ids, lengths)
        np.testing.assert_array_equal(out.logits, np.zeros((3, 3)))

    def test_trailing_pad_does_not_change_eval_outputs(self, tiny_params):
        short = np.array([[2, 3, 4]], dtype=np.int64)
        padded = np.array([[2, 3, 4, 0, 0, 0]], dtype=np.int64)
        lengths = np.array([3])
        a = forward(tiny_params, short, lengths)
        b = forward(tiny_params, padded, lengths)
        np.testing.assert_allclose(a.logits, b.logits, rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose(a.latent, b.latent, rtol=1e-6, atol=1e-7)

    def test_single_sequence_promoted(self, tiny_params):
        out = forward(tiny_params, np.array([2, 3, 0, 0, 0, 0]), 2)
        assert out.logits.shape == (1, 3)

    def test_ids_outside_vocabulary(self, tiny_params):
        with pytest.raises(ConfigurationError, match="different vocabulary"):
            forward(tiny_params, np.array([[2, 99]]), np.array([2]))

    def test_length_count_mismatch(self, tiny_params, token_ids):
        ids, _ = token_ids
        with pytest.raises(ConfigurationError):
            forward(tiny_params, ids, np.array([1, 2]))

    def test_eval_is_deterministic(self, tiny_params, token_ids):
        ids, lengths = token_ids
        first = forward(tiny_params, ids, lengths).features
        second = forward(tiny_params, ids, lengths).features
        np.testing.assert_array_equal(first, second)


class TestReconstructionTarget:
    def test_single_token(self, tiny_params):
        target = reconstruction_target(tiny_params, np.array([[5, 0, 0]]), np.array([1]))
        np.testing.assert_allclose(target[0], tiny_params["embedding.weight"][5])

    def test_mean_of_two(self, tiny_params):
        table = tiny_params["embedding.weight"]
        target = reconstruction_target(tiny_params, np.array([[5, 7, 0]]), np.array([2]))
        np.testing.assert_allclose(target[0], (table[5] + table[7]) / 2, rtol=1e-6)

    def test_all_pad_is_zero(self, tiny_params):
        target = reconstruction_target(tiny_params, np.array([[0, 0, 0]]), np.array([0]))
        np.testing.assert_array_equal(target, np.zeros((1, 4)))


class TestBackward:
    def test_needs_cache(self, tiny_params, token_ids):
        ids, lengths = token_ids
        out = forward(tiny_params, ids, lengths, keep_cache=False)
        with pytest.raises(StateError):
            backward(tiny_params, out, d_logits=np.ones((3, 3)))

    def test_zero_upstream_gives_zero_gradients(self, tiny_params, token_ids):
        ids, lengths = token_ids
        out = forward(tiny_params, ids, lengths, ModelMode.TRAIN)
        grads = backward(tiny_params, out)
        assert set(grads.values) == set(tiny_params.trainable_names)
        for name, grad in grads.values.items():
            assert grad.shape == tiny_params[name].shape
            assert not np.any(grad), name

    def test_detached_reconstruction_keeps_decoder_gradient(self, tiny_params, token_ids):
        ids, lengths = token_ids
        out = forward(tiny_params, ids, lengths, ModelMode.TRAIN)
        d_rec = np.ones_like(out.reconstruction)
        grads = backward(tiny_params, out, d_reconstruction=d_rec, detach_reconstruction=True)
        assert np.any(grads["reconstructor.weight"])
        assert not np.any(grads["latent.weight"])
        assert not np.any(grads["embedding.weight"])


class TestSgdStep:
    def _scalar_case(self, grad_value):
        config = NetworkConfig(vocab_size=3, num_classes=2, max_len=2, embed_dim=1, conv_channels=1, kernel_size=1, latent_dim=1)
        params = init_params(config, seed=0)
        params.values["classifier.bias"] = np.array([1.0, 1.0], dtype=np.float32)
        grads = Gradients(values={"classifier.bias": np.array([grad_value, 0.0], dtype=np.float32)})
        return params, grads

    def test_arithmetic(self):
        params, grads = self._scalar_case(0.5)
        updated = sgd_step(params, grads, lr=0.01)
        assert updated["classifier.bias"][0] == pytest.approx(0.995)
        assert updated["classifier.bias"][1] == pytest.approx(1.0)

    def test_zero_lr_keeps_params(self, tiny_params, token_ids):
        ids, lengths = token_ids
        out = forward(tiny_params, ids, lengths, ModelMode.TRAIN)
        grads = backward(tiny_params, out, d_logits=np.ones((3, 3)))
        grads.batch_stats.clear()
        updated = sgd_step(tiny_params, grads, lr=0.0)
        for name in tiny_params.values:
            np.testing.assert_array_equal(updated[name], tiny_params[name])

    def test_nan_gradient_names_parameter(self):
        params, grads = self._scalar_case(float("nan"))
        with pytest.raises(DivergenceError, match="classifier.bias"):
            sgd_step(params, grads, lr=0.1)

    def test_shape_mismatch(self):
        params, _ = self._scalar_case(0.0)
        with pytest.raises(ShapeError):
            sgd_step(params, Gradients(values={"classifier.bias": np.zeros(3, dtype=np.float32)}), lr=0.1)

    def test_batch_size_divides_summed_gradient(self):
        params, grads = self._scalar_case(2.0)
        updated = sgd_step(params, grads, lr=0.1, batch_size=4)
        assert updated["classifier.bias"][0] == pytest.approx(0.95)

    def test_running_stats_follow_batch(self, tiny_params, token_ids):
        ids, lengths = token_ids
        out = forward(tiny_params, ids, lengths, ModelMode.TRAIN)
        grads = backward(tiny_params, out)
        updated = sgd_step(tiny_params, grads, lr=0.0)
        assert not np.allclose(updated["bn1.running_mean"], tiny_params["bn1.running_mean"])


class TestCheckpoint:
    def test_round_trip_is_bitwise(self, tmp_path, tiny_params):
        path = tmp_path / "net.ckpt"
        save_checkpoint(tiny_params, path, {"labels": ["a", "b", "c"], "vocab_digest": "v1"})
        loaded = load_checkpoint(path)
        assert loaded.config == tiny_params.config
        assert loaded.labels == ["a", "b", "c"]
        assert loaded.vocab_digest == "v1"
        for name, value in tiny_params.values.items():
            assert loaded.params[name].tobytes() == value.tobytes()

    def test_truncated_file(self, tiny_params):
        content = encode_checkpoint(tiny_params)
        with pytest.raises(FormatError):
            decode_checkpoint(content[: len(content) // 2])

    def test_mismatched_vocab_size(self, tiny_params, tiny_network_config):
        content = encode_checkpoint(tiny_params)
        other = NetworkConfig(**{**tiny_network_config.to_dict(), "vocab_size": 20})
        with pytest.raises(ShapeError, match="vocab_size"):
            decode_checkpoint(content, expected=other)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            load_checkpoint(tmp_path / "absent.ckpt")


class TestTextEmbeddings:
    def test_known_rows_replaced(self, tmp_path):
        vocab = Vocabulary.from_tokens(["sad", "feel"])
        config = NetworkConfig(vocab_size=len(vocab), num_classes=2, max_len=3, embed_dim=2, conv_channels=2, latent_dim=2)
        params = init_params(config, seed=1)
        path = tmp_path / "vectors.txt"
        path.write_text("sad 0.5 -1.5\nunknownword 9 9\n")
        loaded = load_text_embeddings(path, vocab, params)
        np.testing.assert_allclose(loaded["embedding.weight"][vocab.index("sad")], [0.5, -1.5])
        np.testing.assert_array_equal(
            loaded["embedding.weight"][vocab.index("feel")], params["embedding.weight"][vocab.index("feel")]
        )

    def test_dimension_mismatch(self, tmp_path):
        vocab = Vocabulary.from_tokens(["sad"])
        config = NetworkConfig(vocab_size=len(vocab), num_classes=2, max_len=3, embed_dim=2, conv_channels=2, latent_dim=2)
        path = tmp_path / "vectors.txt"
        path.write_text("sad 1 2 3\n")
        with pytest.raises(ShapeError, match="expected 2"):
            load_text_embeddings(path, vocab, init_params(config, seed=1))


class TestTokenBatch:
    def test_from_sequences_and_take(self):
        vocab = Vocabulary.from_tokens(["a", "b"])
        sequences = [encode("a b", vocab, 4, sample_id=10), encode("b", vocab, 4, sample_id=11)]
        batch = TokenBatch.from_sequences(sequences, [0, 1])
        assert batch.ids.shape == (2, 4)
        assert batch.lengths.tolist() == [2, 1]
        picked = batch.take(np.array([1]))
        assert picked.sample_ids.tolist() == [11]
        assert picked.labels.tolist() == [1]
