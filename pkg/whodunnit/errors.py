"""
Exception hierarchy shared by every whodunnit sub-package.
"""
from typing import Optional


class WhodunnitError(Exception):
    """Base class for all whodunnit errors."""


# corpus

class CorpusError(WhodunnitError):
    """Raised when screenplay, caption or interchange data is invalid."""


class ScreenplayParseError(CorpusError):
    """Raised when a screenplay line does not follow the screenplay grammar."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class SrtParseError(CorpusError):
    """Raised when an SRT block is malformed or out of order."""

    def __init__(self, message: str, block_index: int):
        super().__init__(f"block {block_index}: {message}")
        self.block_index = block_index


class InterchangeError(CorpusError):
    """Raised when an interchange record violates the SentenceUnit schema."""


# align

class AlignmentError(WhodunnitError):
    """Raised when screenplay dialog cannot be aligned to captions."""


# signal

class FeatureError(WhodunnitError):
    """Raised when per-sentence features cannot be computed."""


class AudioError(FeatureError):
    """Raised for unreadable audio or intervals outside a track."""


class VisualStoreError(FeatureError):
    """Raised for empty or malformed visual feature stores."""


class EmbeddingError(FeatureError):
    """Raised when an embedding file has the wrong dimensionality."""


class FeatureCacheError(FeatureError):
    """Raised when a feature cache file is corrupt."""


# nn / baselines

class ModelError(WhodunnitError):
    """Raised for invalid model configurations or parameters."""


class ShapeError(ModelError):
    """Raised when tensor shapes disagree with the model configuration."""


class NonFiniteLossError(ModelError):
    """Raised when a case produces a NaN or infinite loss."""

    def __init__(self, message: str, case_key: Optional[str] = None):
        super().__init__(f"{message} (case {case_key})" if case_key else message)
        self.case_key = case_key


class CheckpointError(ModelError):
    """Raised when a checkpoint container cannot be read or written."""


# evaluation

class EvaluationError(WhodunnitError):
    """Raised when metrics cannot be computed at all."""


class SplitError(EvaluationError):
    """Raised when there are too few cases for the requested split plan."""


class AgreementError(EvaluationError):
    """Raised when an agreement statistic is undefined."""


# synthgen

class SynthError(WhodunnitError):
    """Raised for infeasible synthetic dataset specifications."""


# cli

class ConfigError(WhodunnitError):
    """Raised for unknown or ill-typed configuration keys."""
