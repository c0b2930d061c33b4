"""abxlab: ABX discriminability scoring for frame-level speech features."""

__version__ = "0.1.0"

from .errors import (
    AbxlabError,
    ConsistencyError,
    DataError,
    EmptyArchiveError,
    EmptyTaskError,
    FormatError,
    InconclusiveGradCheck,
    RowError,
    TrainingError,
    UnmappedPhoneError,
    UsageError,
)

__all__ = [
    "AbxlabError",
    "ConsistencyError",
    "DataError",
    "EmptyArchiveError",
    "EmptyTaskError",
    "FormatError",
    "InconclusiveGradCheck",
    "RowError",
    "TrainingError",
    "UnmappedPhoneError",
    "UsageError",
    "__version__",
]
