from .enums import BaseLoss, DistMode, ModelMode, ModelRole, PMode, ResampleMode

__all__ = [
    "BaseLoss",
    "DistMode",
    "ModelMode",
    "ModelRole",
    "PMode",
    "ResampleMode",
]
