from .classification import (
    LossResult,
    SoftConfusion,
    cross_entropy,
    dice_from_logits,
    dice_loss,
    focal_loss,
    mse,
    soft_confusion,
    tversky_from_logits,
    tversky_loss,
)
from .composite import (
    ComposedObjective,
    LossConfig,
    TrainSchedule,
    base_loss,
    compose_objective,
    latentg_term,
    total_loss,
    total_loss_partials,
)

__all__ = [
    "ComposedObjective",
    "LossConfig",
    "LossResult",
    "SoftConfusion",
    "TrainSchedule",
    "base_loss",
    "compose_objective",
    "cross_entropy",
    "dice_from_logits",
    "dice_loss",
    "focal_loss",
    "latentg_term",
    "mse",
    "soft_confusion",
    "total_loss",
    "total_loss_partials",
    "tversky_from_logits",
    "tversky_loss",
]
