"""Tests for teacher feature stores, transfer signals and the transfer setup."""

import numpy as np
import pytest

from app.core.config import DistillSettings
from app.core.exceptions import DimensionError, FitError, SampleLookupError, StateError, VocabError
from app.domain.enums import DistMode, PMode
from app.services.distill import (
    FEATURES_FILE,
    GMM_FILE,
    GMM_REPORT_FILE,
    TeacherFeatureStore,
    compute_batch_signals,
    compute_features,
    compute_signal,
    corpus_signals,
    euclidean_distance,
    extract_teacher_features,
    load_feature_store,
    run_algorithm1,
    save_feature_store,
    write_signals_csv,
)
from app.services.gmm import GmmModel, load_gmm
from app.services.neuralnet import Checkpoint, TokenBatch, init_params
from app.services.storage import LocalArtifactStore
from app.services.trainer import make_batch, network_config_for
from app.services.vectorize import Vocabulary


def symmetric_gmm() -> GmmModel:
    return GmmModel(
        weights=np.array([0.5, 0.5]),
        means=np.array([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        variances=np.ones((2, 3)),
        component_to_class=np.array([0, 1]),
    )


def small_store(matrix: np.ndarray, latent_dim: int = 1) -> TeacherFeatureStore:
    return TeacherFeatureStore(ids=np.arange(1, len(matrix) + 1), matrix=matrix, latent_dim=latent_dim)


class TestEuclideanDistance:
    def test_examples(self):
        assert euclidean_distance([0, 0], [3, 4]) == pytest.approx(5.0)
        assert euclidean_distance([1, 1, 1], [1, 1, 1]) == 0.0

    def test_normalized(self):
        assert euclidean_distance([0, 0, 0, 0], [1, 1, 1, 1], normalize=True) == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            euclidean_distance([0, 0], [0, 0, 0])


class TestTeacherFeatureStore:
    def test_lookup(self):
        store = small_store(np.array([[1.0, 2.0], [3.0, 4.0]]))
        np.testing.assert_array_equal(store.lookup([2, 1]), [[3.0, 4.0], [1.0, 2.0]])
        assert 2 in store and 9 not in store

    def test_unknown_id(self):
        with pytest.raises(SampleLookupError, match="42"):
            small_store(np.zeros((2, 2))).lookup([1, 42])

    def test_round_trip(self, tmp_path, tiny_params, token_ids):
        ids, lengths = token_ids
        batch = TokenBatch(ids=ids, lengths=lengths, sample_ids=np.array([5, 6, 7]), labels=np.array([0, 1, 2]))
        vocab = Vocabulary.from_tokens([f"t{i}" for i in range(10)])
        store = extract_teacher_features(tiny_params, batch, vocab, "ckpt")
        path = tmp_path / "features.bin"
        save_feature_store(store, path)
        loaded = load_feature_store(path)
        assert loaded.ids.tolist() == [5, 6, 7]
        assert loaded.matrix.tobytes() == store.matrix.tobytes()
        assert loaded.latent_dim == tiny_params.config.latent_dim
        assert loaded.checkpoint_digest == "ckpt"

    def test_vocab_size_mismatch(self, tiny_params, token_ids):
        ids, lengths = token_ids
        batch = TokenBatch(ids=ids, lengths=lengths, sample_ids=np.array([1, 2, 3]), labels=np.array([0, 1, 2]))
        with pytest.raises(VocabError):
            extract_teacher_features(tiny_params, batch, Vocabulary.from_tokens(["a"]), "")


class TestSignals:
    def test_identical_features_have_zero_distance(self):
        teacher = np.array([[0.2, 0.5, -0.1], [1.0, 0.0, 0.3]])
        signals = compute_batch_signals(teacher, [1, 2], [0, 1], small_store(teacher), symmetric_gmm(), DistillSettings())
        np.testing.assert_allclose(signals.dist, [0.0, 0.0])
        assert not np.any(signals.d_dist)

    def test_symmetric_point_has_half_probability(self):
        teacher = np.zeros((1, 3))
        signal = compute_signal(np.zeros(3), 1, small_store(teacher), symmetric_gmm(), 0, DistillSettings())
        assert signal.p == pytest.approx(0.5)
        assert latentg_of(signal) == pytest.approx(0.56 * 0.5)

    def test_most_likely_posterior(self):
        config = DistillSettings(p_mode=PMode.MOST_LIKELY_POSTERIOR)
        signal = compute_signal(np.array([1.0, 0.0, 0.0]), 1, small_store(np.zeros((1, 3))), symmetric_gmm(), 0, config)
        assert signal.component == 1
        assert signal.p > 0.5

    def test_true_class_posterior_uses_label(self):
        store = small_store(np.zeros((1, 3)))
        x = np.array([1.0, 0.0, 0.0])
        wrong = compute_signal(x, 1, store, symmetric_gmm(), 0, DistillSettings())
        right = compute_signal(x, 1, store, symmetric_gmm(), 1, DistillSettings())
        assert wrong.p + right.p == pytest.approx(1.0)
        assert right.p > wrong.p

    def test_clamped_pdf_stays_in_unit_interval(self):
        tight = GmmModel(
            weights=np.array([1.0]),
            means=np.zeros((1, 3)),
            variances=np.full((1, 3), 1e-3),
            component_to_class=np.array([0]),
        )
        config = DistillSettings(p_mode=PMode.CLAMPED_PDF)
        signal = compute_signal(np.zeros(3), 1, small_store(np.zeros((1, 3))), tight, 0, config)
        assert signal.p == 1.0

    def test_logits_distance_ignores_latent(self):
        teacher = np.array([[0.0, 1.0, 2.0]])
        student = np.array([[9.0, 1.0, 2.0]])
        store = small_store(teacher, latent_dim=1)
        feature = compute_batch_signals(student, [1], [0], store, symmetric_gmm(), DistillSettings())
        logits = compute_batch_signals(
            student, [1], [0], store, symmetric_gmm(), DistillSettings(dist_mode=DistMode.LOGITS)
        )
        assert feature.dist[0] == pytest.approx(9.0)
        assert logits.dist[0] == pytest.approx(0.0)

    def test_stop_gradient(self):
        config = DistillSettings(stop_gradient_signals=True)
        signals = compute_batch_signals(
            np.ones((1, 3)), [1], [0], small_store(np.zeros((1, 3))), symmetric_gmm(), config
        )
        assert signals.dist[0] > 0
        assert not np.any(signals.d_p) and not np.any(signals.d_dist)

    def test_missing_sample(self):
        with pytest.raises(SampleLookupError):
            compute_batch_signals(np.zeros((1, 3)), [7], [0], small_store(np.zeros((1, 3))), symmetric_gmm(), DistillSettings())

    def test_unmapped_mixture(self):
        gmm = symmetric_gmm()
        gmm.component_to_class = None
        with pytest.raises(StateError):
            compute_signal(np.zeros(3), 1, small_store(np.zeros((1, 3))), gmm, 0, DistillSettings())

    def test_student_copy_of_teacher(self, fast_config, synthetic_corpus, synthetic_vocab):
        batch = make_batch(synthetic_corpus, synthetic_vocab, fast_config.vocab.max_len)
        params = init_params(network_config_for(fast_config, len(synthetic_vocab)), seed=1)
        transfer = run_algorithm1(Checkpoint(params=params), batch, synthetic_vocab, fast_config)
        signals = corpus_signals(params, batch, transfer.store, transfer.gmm, fast_config.distill)
        np.testing.assert_array_equal(signals.dist, np.zeros(len(batch)))
        latentg = signals.latentg(fast_config.loss.alpha, fast_config.loss.beta)
        np.testing.assert_allclose(latentg, fast_config.loss.alpha * (1 - signals.p))


def latentg_of(signal) -> float:
    return 0.56 * (1 - signal.p) + 0.44 * signal.dist


class TestAlgorithm1:
    @pytest.fixture
    def teacher(self, fast_config, synthetic_vocab):
        params = init_params(network_config_for(fast_config, len(synthetic_vocab)), seed=2)
        return Checkpoint(params=params, metadata={"vocab_digest": synthetic_vocab.digest()})

    def test_artifacts(self, tmp_path, fast_config, synthetic_corpus, synthetic_vocab, teacher):
        batch = make_batch(synthetic_corpus, synthetic_vocab, fast_config.vocab.max_len)
        artifacts = LocalArtifactStore(tmp_path, fast_config.digest())
        result = run_algorithm1(teacher, batch, synthetic_vocab, fast_config, "abc", artifacts)
        assert result.gmm.num_components == fast_config.num_classes()
        assert result.gmm.component_to_class.shape == (fast_config.num_classes(),)
        assert len(result.store) == len(synthetic_corpus)
        assert (tmp_path / FEATURES_FILE).exists()
        assert (tmp_path / GMM_REPORT_FILE).exists()
        assert load_gmm(tmp_path / GMM_FILE).means.tobytes() == result.gmm.means.tobytes()

    def test_deterministic(self, fast_config, synthetic_corpus, synthetic_vocab, teacher):
        batch = make_batch(synthetic_corpus, synthetic_vocab, fast_config.vocab.max_len)
        first = run_algorithm1(teacher, batch, synthetic_vocab, fast_config)
        second = run_algorithm1(teacher, batch, synthetic_vocab, fast_config)
        assert first.store.matrix.tobytes() == second.store.matrix.tobytes()
        assert first.gmm.means.tobytes() == second.gmm.means.tobytes()
        assert first.gmm.component_to_class.tolist() == second.gmm.component_to_class.tolist()

    def test_features_match_forward_in_any_chunking(self, fast_config, synthetic_corpus, synthetic_vocab, teacher):
        batch = make_batch(synthetic_corpus, synthetic_vocab, fast_config.vocab.max_len)
        np.testing.assert_allclose(
            compute_features(teacher.params, batch, batch_size=7),
            compute_features(teacher.params, batch),
            rtol=1e-5,
            atol=1e-6,
        )

    def test_too_few_samples(self, fast_config, synthetic_corpus, synthetic_vocab, teacher):
        batch = make_batch(synthetic_corpus, synthetic_vocab, fast_config.vocab.max_len).take(np.arange(3))
        with pytest.raises(FitError):
            run_algorithm1(teacher, batch, synthetic_vocab, fast_config)

    def test_vocab_digest_mismatch(self, fast_config, synthetic_corpus, synthetic_vocab, teacher):
        batch = make_batch(synthetic_corpus, synthetic_vocab, fast_config.vocab.max_len)
        teacher.metadata["vocab_digest"] = "other"
        with pytest.raises(VocabError):
            run_algorithm1(teacher, batch, synthetic_vocab, fast_config)


class TestSignalsCsv:
    def test_rows(self, tmp_path):
        teacher = np.zeros((2, 3))
        signals = compute_batch_signals(
            np.ones((2, 3)), [1, 2], [0, 1], small_store(teacher), symmetric_gmm(), DistillSettings()
        )
        artifacts = LocalArtifactStore(tmp_path, "dig")
        key = write_signals_csv(3, signals, artifacts)
        lines = (tmp_path / key).read_text().splitlines()
        assert key == "student/signals_epoch3.csv"
        assert lines[1] == "id,p,dist,component"
        assert len(lines) == 4
