import hashlib
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.exceptions import ConfigurationError
from app.domain.enums import BaseLoss, DistMode, PMode, ResampleMode

DEFAULT_LABELS = (
    "Normal",
    "Depression",
    "Suicidal",
    "Anxiety",
    "Stress",
    "Bipolar",
    "Personal Disorder",
)


def _split_csv(value: Any) -> Any:
    """Accept comma-separated strings for list-valued keys."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", use_enum_values=False)


class CorpusSettings(_Section):
    id_column: str = "id"
    text_column: str = "statement"
    label_column: str = "status"
    labels: list[str] = Field(default_factory=lambda: list(DEFAULT_LABELS))
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    k_folds: Optional[int] = Field(default=3, ge=2)
    remove_stopwords: bool = False
    resample: ResampleMode = ResampleMode.NONE
    augment: bool = False

    @field_validator("labels", mode="before")
    @classmethod
    def _labels(cls, value: Any) -> Any:
        return _split_csv(value)

    @field_validator("resample", mode="before")
    @classmethod
    def _resample(cls, value: Any) -> Any:
        # `none` is both a mode name and the flat format's null.
        return ResampleMode.NONE if value is None else value

    @field_validator("labels")
    @classmethod
    def _label_count(cls, value: list[str]) -> list[str]:
        if len(value) < 2:
            raise ValueError("label set needs at least 2 classes")
        if len(set(value)) != len(value):
            raise ValueError("label names must be unique")
        return value


class VocabSettings(_Section):
    min_freq: int = Field(default=2, ge=1)
    max_len: int = Field(default=64, ge=1)


class NetworkSettings(_Section):
    embed_dim: int = Field(default=100, ge=1)
    conv_channels: int = Field(default=128, ge=1)
    kernel_size: int = Field(default=3, ge=1)
    latent_dim: int = Field(default=64, ge=1)
    pretrained_embeddings: Optional[Path] = None


class LossSettings(_Section):
    base_loss: BaseLoss = BaseLoss.CE
    alpha: float = Field(default=0.56, ge=0.0)
    beta: float = Field(default=0.44, ge=0.0)
    gamma: float = Field(default=75.0, ge=0.0)
    focal_alpha_t: Optional[list[float]] = None
    focal_gamma: float = Field(default=2.0, ge=0.0)
    tversky_alpha: float = Field(default=0.3, ge=0.0)
    tversky_beta: float = Field(default=0.7, ge=0.0)
    mixture_weights: dict[str, float] = Field(default_factory=dict)
    per_sample_composition: bool = False

    @field_validator("focal_alpha_t", mode="before")
    @classmethod
    def _focal_weights(cls, value: Any) -> Any:
        if value in ("", "none", None):
            return None
        return _split_csv(value)

    @field_validator("mixture_weights", mode="before")
    @classmethod
    def _mixture(cls, value: Any) -> Any:
        if isinstance(value, str):
            weights = {}
            for item in _split_csv(value):
                name, _, weight = item.partition(":")
                weights[name.strip().lower()] = float(weight or 1.0)
            return weights
        return value

    @field_validator("mixture_weights")
    @classmethod
    def _mixture_names(cls, value: dict[str, float]) -> dict[str, float]:
        allowed = {loss.value for loss in BaseLoss if loss is not BaseLoss.MIXTURE}
        unknown = set(value) - allowed
        if unknown:
            raise ValueError(f"unknown mixture components: {sorted(unknown)}")
        if any(weight < 0 for weight in value.values()):
            raise ValueError("mixture weights must be >= 0")
        return value


class DistillSettings(_Section):
    p_mode: PMode = PMode.TRUE_CLASS_POSTERIOR
    dist_mode: DistMode = DistMode.FEATURE
    dist_normalize: bool = False
    stop_gradient_signals: bool = False
    dump_signals: bool = False
    gmm_components: Optional[int] = Field(default=None, ge=1)
    gmm_max_iter: int = Field(default=200, ge=1)
    gmm_tol: float = Field(default=1e-6, gt=0.0)


class TrainerSettings(_Section):
    teacher_epochs: int = Field(default=300, ge=1)
    student_epochs: int = Field(default=500, ge=1)
    lr: float = Field(default=0.01, ge=0.0)
    batch_size: int = Field(default=32, ge=1)
    momentum: float = Field(default=0.0, ge=0.0, lt=1.0)
    weight_decay: float = Field(default=0.0, ge=0.0)
    detach_reconstruction: bool = False


class BaselineSettings(_Section):
    lr_grid: list[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    l2_grid: list[float] = Field(default_factory=lambda: [0.0, 1e-4, 1e-3])
    epochs: int = Field(default=100, ge=1)
    batch_size: int = Field(default=32, ge=1)
    cv_folds: int = Field(default=3, ge=2)
    top_features: int = Field(default=10, ge=1)

    @field_validator("lr_grid", "l2_grid", mode="before")
    @classmethod
    def _grid(cls, value: Any) -> Any:
        return _split_csv(value)


class RunConfig(BaseSettings):
    """Every knob of a pipeline run, one nested model per section."""

    project_name: str = "LatentG Text Classification"
    seed: int = 42
    output_dir: Path = Path("runs/default")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    corpus: CorpusSettings = Field(default_factory=CorpusSettings)
    vocab: VocabSettings = Field(default_factory=VocabSettings)
    network: NetworkSettings = Field(default_factory=NetworkSettings)
    loss: LossSettings = Field(default_factory=LossSettings)
    distill: DistillSettings = Field(default_factory=DistillSettings)
    trainer: TrainerSettings = Field(default_factory=TrainerSettings)
    baseline: BaselineSettings = Field(default_factory=BaselineSettings)

    model_config = SettingsConfigDict(
        env_prefix="LATENTG_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    def to_flat_text(self, exclude: Optional[set[str]] = None) -> str:
        """Render the config in the `section.key = value` file format."""
        lines = []
        for key, value in _flatten(self.model_dump(mode="json", exclude=exclude)):
            lines.append(f"{key} = {_render(value)}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        # Where a run writes and how loudly it logs do not change its results.
        text = self.to_flat_text(exclude={"output_dir", "log_level"})
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def num_classes(self) -> int:
        return len(self.corpus.labels)


def _flatten(data: dict[str, Any], prefix: str = "") -> list[tuple[str, Any]]:
    items: list[tuple[str, Any]] = []
    for key in sorted(data):
        value = data[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict) and prefix == "":
            items.extend(_flatten(value, prefix=f"{name}."))
        else:
            items.append((name, value))
    return items


def _render(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(_render(item) for item in value)
    if isinstance(value, dict):
        return ",".join(f"{k}:{_render(v)}" for k, v in sorted(value.items()))
    return str(value)


def parse_flat_config(text: str, source: str = "<config>") -> dict[str, Any]:
    """
    Parse `section.key = value` lines into a nested dict.

    Blank lines and lines starting with `#` are ignored.
    """
    nested: dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{line_number}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        _assign(nested, key.strip(), value.strip(), f"{source}:{line_number}")
    return nested


def _assign(nested: dict[str, Any], key: str, value: str, where: str) -> None:
    parts = key.split(".")
    if len(parts) > 2 or not all(parts):
        raise ConfigurationError(f"{where}: invalid key {key!r}")
    if value.lower() == "none":
        value = None  # type: ignore[assignment]
    if len(parts) == 1:
        nested[parts[0]] = value
    else:
        section = nested.setdefault(parts[0], {})
        if not isinstance(section, dict):
            raise ConfigurationError(f"{where}: {parts[0]!r} is not a section")
        section[parts[1]] = value


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[list[str]] = None,
    **top_level: Any,
) -> RunConfig:
    """
    Build the effective RunConfig.

    Args:
        path: Optional flat config file
        overrides: `section.key=value` strings applied after the file
        top_level: Non-None values (seed, output_dir) applied last

    Raises:
        ConfigurationError: On unreadable files, malformed lines or values
            pydantic rejects (including unknown keys)
    """
    nested: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Cannot read config file {path}: {e}") from e
        nested = parse_flat_config(text, source=str(path))

    for item in overrides or []:
        if "=" not in item:
            raise ConfigurationError(f"Override must look like section.key=value, got {item!r}")
        key, _, value = item.partition("=")
        _assign(nested, key.strip(), value.strip(), "--set")

    for key, value in top_level.items():
        if value is not None:
            nested[key] = value

    try:
        return RunConfig(**nested)
    except PydanticValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e


@lru_cache
def get_settings() -> RunConfig:
    return RunConfig()
