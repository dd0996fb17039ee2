"""Exception hierarchy shared by every service.

Validation errors (bad input, bad config, missing prerequisites) map to CLI
exit code 1; runtime errors (divergence, numeric trouble) map to exit code 2.
"""


class LatentGError(Exception):
    """Root of all errors raised by this package."""

    exit_code = 2


class ValidationError(LatentGError, ValueError):
    """Input, configuration or artifact does not satisfy a precondition."""

    exit_code = 1


class LatentGRuntimeError(LatentGError, RuntimeError):
    """A well-formed run failed while executing."""

    exit_code = 2


# Validation family

class ConfigurationError(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class LabelError(ValidationError):
    pass


class DuplicateIdError(ValidationError):
    pass


class StratificationError(ValidationError):
    pass


class FoldError(ValidationError):
    pass


class StatsError(ValidationError):
    pass


class VocabError(ValidationError):
    pass


class FormatError(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class LabelSetMismatchError(ValidationError):
    pass


class MissingArtifactError(ValidationError):
    """A subcommand ran before the one that produces its inputs."""

    def __init__(self, artifact: str, producer: str):
        self.artifact = artifact
        self.producer = producer
        super().__init__(f"Missing artifact {artifact}; run `{producer}` first")


# Runtime family

class DivergenceError(LatentGRuntimeError):
    pass


class StateError(LatentGRuntimeError):
    pass


class NumericError(LatentGRuntimeError):
    pass


class ContractError(LatentGRuntimeError):
    pass


class SampleLookupError(LatentGRuntimeError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class FitError(LatentGRuntimeError):
    pass
