"""Teacher-to-student transfer setup: teacher features, mixture fit, component map."""

import logging
from dataclasses import dataclass, replace
from typing import Optional

from app.core.config import RunConfig
from app.core.exceptions import VocabError
from app.schemas.reports import GmmReport
from app.services import gmm as gmm_service
from app.services.neuralnet import Checkpoint, TokenBatch
from app.services.storage import LocalArtifactStore
from app.services.vectorize import Vocabulary
from .features import TeacherFeatureStore, extract_teacher_features, save_feature_store

logger = logging.getLogger(__name__)

FEATURES_FILE = "teacher_features.bin"
GMM_FILE = "gmm.bin"
GMM_REPORT_FILE = "gmm_report.json"


@dataclass
class Algorithm1Result:
    store: TeacherFeatureStore
    gmm: gmm_service.GmmModel
    report: GmmReport


def run_algorithm1(
    teacher: Checkpoint,
    batch: TokenBatch,
    vocab: Vocabulary,
    config: RunConfig,
    checkpoint_digest: str = "",
    artifacts: Optional[LocalArtifactStore] = None,
) -> Algorithm1Result:
    """
    Extract teacher FeatureVectors for the training samples, fit the mixture
    (one component per class unless configured otherwise) and map components
    to classes. Artifacts are persisted when a store is given.

    Raises:
        VocabError: the vocabulary differs from the one the teacher was trained on
        FitError: fewer samples than mixture components
    """
    if teacher.vocab_digest and teacher.vocab_digest != vocab.digest():
        raise VocabError(
            f"Vocabulary digest {vocab.digest()} differs from the teacher's {teacher.vocab_digest}"
        )
    store = extract_teacher_features(teacher.params, batch, vocab, checkpoint_digest)
    store.config_digest = config.digest()

    num_classes = config.num_classes()
    components = config.distill.gmm_components or num_classes
    model = gmm_service.fit(
        store.matrix,
        components,
        seed=config.seed,
        max_iter=config.distill.gmm_max_iter,
        tol=config.distill.gmm_tol,
    )
    model = gmm_service.map_components_to_classes(model, store.matrix, batch.labels, num_classes)
    model = replace(model, config_digest=config.digest())
    report = gmm_service.build_report(model, config.corpus.labels)
    report.config_digest = config.digest()

    if artifacts is not None:
        save_feature_store(store, artifacts.path(FEATURES_FILE))
        gmm_service.save_gmm(model, artifacts.path(GMM_FILE))
        artifacts.write_json(GMM_REPORT_FILE, report)
    logger.info(f"Transfer setup done: {len(store)} teacher vectors, {components} mixture components")
    return Algorithm1Result(store=store, gmm=model, report=report)
