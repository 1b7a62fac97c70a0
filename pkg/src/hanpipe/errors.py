"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, data errors -> 2,
model errors -> 3.
"""


class HanpipeError(Exception):
    """Base class for all package errors."""


class ContractError(HanpipeError, ValueError):
    """A documented precondition was violated by the caller."""


class ShapeError(ContractError):
    """Operand shapes are incompatible with the requested operation."""


class DataError(HanpipeError):
    """Problems with corpora, configs, or other user-supplied data."""


class CorpusFormatError(DataError):
    """Malformed corpus file; message carries file name and line number."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class ConfigError(DataError):
    """Invalid pipeline configuration."""


class ModelError(HanpipeError):
    """Problems loading or using a saved model."""


class TrainingDivergedError(HanpipeError):
    """Training produced a non-finite loss."""
