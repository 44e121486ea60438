"""Exception types raised across mapper_forge."""


class MapperForgeError(Exception):
    """Base class for all library errors."""


class ConfigurationError(MapperForgeError, ValueError):
    """Invalid parameters, specs or configs.

    ``fiber`` is set when the error was raised while clustering a specific
    cover element, so callers can report which fiber triggered it.
    """

    def __init__(self, message, fiber=None):
        self.fiber = fiber
        if fiber is not None:
            message = f"fiber {tuple(fiber)}: {message}"
        super().__init__(message)


class DimensionMismatchError(MapperForgeError, ValueError):
    pass


class DomainError(MapperForgeError, ValueError):
    """A value is outside the domain of a metric or formula."""


class UndefinedScoreError(MapperForgeError, ValueError):
    pass


class CsvParseError(MapperForgeError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class PresetNotFoundError(MapperForgeError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class PipelineError(MapperForgeError, RuntimeError):
    """A runtime failure inside one pipeline stage."""

    def __init__(self, message, stage=None):
        self.stage = stage
        if stage is not None:
            message = f"[{stage}] {message}"
        super().__init__(message)
