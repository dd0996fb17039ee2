"""Enums shared across the pipeline services."""

from enum import Enum as PyEnum


class BaseLoss(str, PyEnum):
    """Classification loss occupying the base slot of the total loss."""
    CE = "ce"
    FOCAL = "focal"
    TVERSKY = "tversky"
    DICE = "dice"
    MIXTURE = "mixture"


class PMode(str, PyEnum):
    """How the GMM alignment probability p is read off a student feature."""
    TRUE_CLASS_POSTERIOR = "true_class_posterior"
    MOST_LIKELY_POSTERIOR = "most_likely_posterior"
    CLAMPED_PDF = "clamped_pdf"


class DistMode(str, PyEnum):
    """Which part of the feature vectors the teacher-student distance uses."""
    FEATURE = "feature"
    LOGITS = "logits"


class ModelMode(str, PyEnum):
    """Batch-norm behaviour of a forward pass."""
    TRAIN = "train"
    EVAL = "eval"


class ResampleMode(str, PyEnum):
    """Optional class rebalancing of the training split."""
    NONE = "none"
    UNDERSAMPLE = "undersample"
    OVERSAMPLE = "oversample"


class ModelRole(str, PyEnum):
    """Which network of the pair an artifact belongs to."""
    TEACHER = "teacher"
    STUDENT = "student"
