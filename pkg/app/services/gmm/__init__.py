from .mixture import (
    VAR_FLOOR,
    GmmBatchEval,
    GmmEval,
    GmmModel,
    component_log_densities,
    em_step,
    evaluate,
    evaluate_batch,
    fit,
    log_likelihood,
    map_components_to_classes,
)
from .storage import build_report, decode_gmm, encode_gmm, load_gmm, save_gmm

__all__ = [
    "GmmBatchEval",
    "GmmEval",
    "GmmModel",
    "VAR_FLOOR",
    "build_report",
    "component_log_densities",
    "decode_gmm",
    "em_step",
    "encode_gmm",
    "evaluate",
    "evaluate_batch",
    "fit",
    "load_gmm",
    "log_likelihood",
    "map_components_to_classes",
    "save_gmm",
]
