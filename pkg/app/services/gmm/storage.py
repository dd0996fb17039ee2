import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from app.core.exceptions import FormatError, ShapeError
from app.schemas.reports import GmmComponentReport, GmmReport
from app.services.storage import GMM_MAGIC, decode_container, encode_container, write_container
from .mixture import GmmModel

logger = logging.getLogger(__name__)

GMM_KIND = "gmm"


def encode_gmm(model: GmmModel) -> bytes:
    arrays = {"weights": model.weights, "means": model.means, "variances": model.variances}
    if model.component_to_class is not None:
        arrays["component_to_class"] = np.asarray(model.component_to_class, dtype=np.int64)
    header = {
        "num_components": model.num_components,
        "dimension": model.dimension,
        "config_digest": model.config_digest,
        "metadata": {
            "iterations": model.iterations,
            "log_likelihood": model.log_likelihood,
            "converged": model.converged,
            "degenerate": model.degenerate,
            "var_floor": model.var_floor,
            "history": model.history,
        },
    }
    return encode_container(GMM_MAGIC, GMM_KIND, arrays, dtype="float64", header=header)


def decode_gmm(content: bytes, source: str = "<bytes>") -> GmmModel:
    """
    Raises:
        FormatError: not a GMM container or arrays missing
        ShapeError: header K/D disagree with the stored arrays
    """
    payload = decode_container(content, GMM_MAGIC, source)
    if payload.kind != GMM_KIND:
        raise FormatError(f"{source}: expected a {GMM_KIND} container, found {payload.kind!r}")
    for name in ("weights", "means", "variances"):
        if name not in payload.arrays:
            raise FormatError(f"{source}: missing array {name}")

    k = int(payload.header.get("num_components", -1))
    d = int(payload.header.get("dimension", -1))
    weights, means, variances = payload.arrays["weights"], payload.arrays["means"], payload.arrays["variances"]
    if weights.shape != (k,) or means.shape != (k, d) or variances.shape != (k, d):
        raise ShapeError(
            f"{source}: header says K={k}, D={d} but arrays have shapes "
            f"{weights.shape}, {means.shape}, {variances.shape}"
        )
    mapping = payload.arrays.get("component_to_class")
    if mapping is not None and mapping.shape != (k,):
        raise ShapeError(f"{source}: component map has shape {mapping.shape}, expected ({k},)")

    meta = payload.header.get("metadata", {})
    return GmmModel(
        weights=weights,
        means=means,
        variances=variances,
        component_to_class=mapping,
        iterations=int(meta.get("iterations", 0)),
        log_likelihood=float(meta.get("log_likelihood", float("nan"))),
        converged=bool(meta.get("converged", False)),
        degenerate=bool(meta.get("degenerate", False)),
        var_floor=float(meta.get("var_floor", 1e-6)),
        history=[float(v) for v in meta.get("history", [])],
        config_digest=str(payload.header.get("config_digest", "")),
    )


def save_gmm(model: GmmModel, path: Path) -> None:
    write_container(Path(path), encode_gmm(model))


def load_gmm(path: Path) -> GmmModel:
    try:
        content = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read GMM {path}: {e}") from e
    return decode_gmm(content, source=str(path))


def build_report(model: GmmModel, label_names: Optional[Sequence[str]] = None) -> GmmReport:
    mapping = model.component_to_class
    components = []
    for k in range(model.num_components):
        mapped = int(mapping[k]) if mapping is not None else -1
        components.append(GmmComponentReport(
            component=k,
            weight=float(model.weights[k]),
            mapped_class=mapped,
            mapped_label=label_names[mapped] if label_names is not None and mapped >= 0 else None,
        ))
    return GmmReport(
        num_components=model.num_components,
        dimension=model.dimension,
        iterations=model.iterations,
        converged=model.converged,
        degenerate=model.degenerate,
        final_log_likelihood=float(model.log_likelihood),
        components=components,
    )
