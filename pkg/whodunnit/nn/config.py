"""
Model and training configuration.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Tuple

from whodunnit.errors import ModelError
from whodunnit.nn import constants
from whodunnit.signal.constants import ACOUSTIC_DIM, EMBEDDING_DIM, VISUAL_DIM


@dataclass(frozen=True)
class Modalities:
    """Which input modalities feed the fusion layer."""
    text: bool = True
    visual: bool = True
    acoustic: bool = True

    @classmethod
    def parse(cls, value: str) -> "Modalities":
        """
        Parse a modality string such as ``T``, ``T+V`` or ``T,V,A``.

        Raises:
            ModelError: Unknown letter
        """
        letters = {part.strip().upper() for part in value.replace("+", ",").split(",") if part.strip()}
        unknown = letters - set(constants.MODALITY_LETTERS)
        if unknown:
            raise ModelError(f"unknown modalities {sorted(unknown)}; use letters from {constants.MODALITY_LETTERS}")
        return cls(text="T" in letters, visual="V" in letters, acoustic="A" in letters)

    @property
    def label(self) -> str:
        """Short form used in reports, e.g. ``T+V+A``."""
        flags = zip(constants.MODALITY_LETTERS, (self.text, self.visual, self.acoustic))
        return "+".join(letter for letter, enabled in flags if enabled)


@dataclass(frozen=True)
class ModelConfig:
    """Layer sizes of the tagger front-end and recurrent core."""
    vocab_size: int
    embedding_dim: int = EMBEDDING_DIM
    conv_widths: Tuple[int, ...] = constants.CONV_WIDTHS
    conv_channels: int = constants.CONV_CHANNELS
    visual_dim: int = VISUAL_DIM
    acoustic_dim: int = ACOUSTIC_DIM
    fusion_dim: int = constants.FUSION_DIM
    hidden_dim: int = constants.HIDDEN_DIM
    modalities: Modalities = field(default_factory=Modalities)
    init_scale: float = constants.INIT_SCALE

    def __post_init__(self):
        if not self.modalities.text:
            raise ModelError("the text modality must be enabled")
        if self.vocab_size < 2:
            raise ModelError("vocabulary must contain at least the pad and unknown tokens")

    @property
    def sentence_dim(self) -> int:
        return len(self.conv_widths) * self.conv_channels

    @property
    def fusion_input_dim(self) -> int:
        """m: the width of the concatenated modality vector."""
        dim = self.sentence_dim
        if self.modalities.visual:
            dim += self.visual_dim
        if self.modalities.acoustic:
            dim += self.acoustic_dim
        return dim


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings shared by every trainable tagger."""
    learning_rate: float = constants.LEARNING_RATE
    epochs: int = constants.EPOCHS
    batch_cases: int = constants.BATCH_CASES
    dropout: float = constants.DROPOUT
    seed: int = 0
    runs: int = constants.RUNS
    beta1: float = constants.ADAM_BETA1
    beta2: float = constants.ADAM_BETA2
    epsilon: float = constants.ADAM_EPSILON
    modalities: Modalities = field(default_factory=Modalities)

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise ModelError(f"dropout must lie in [0, 1), got {self.dropout}")
        if not self.modalities.text:
            raise ModelError("the text modality must be enabled")
        if self.epochs < 1 or self.batch_cases < 1 or self.runs < 1:
            raise ModelError("epochs, batch_cases and runs must be positive")
        if self.learning_rate <= 0:
            raise ModelError(f"learning_rate must be positive, got {self.learning_rate}")


def model_config_to_dict(config: ModelConfig) -> Dict[str, Any]:
    """JSON-ready echo of a model configuration."""
    echo = asdict(config)
    echo["conv_widths"] = list(config.conv_widths)
    echo["modalities"] = config.modalities.label
    return echo


def model_config_from_dict(echo: Dict[str, Any]) -> ModelConfig:
    """
    Inverse of model_config_to_dict.

    Raises:
        ModelError: Unknown or missing keys
    """
    echo = dict(echo)
    try:
        echo["conv_widths"] = tuple(int(width) for width in echo["conv_widths"])
        echo["modalities"] = Modalities.parse(echo["modalities"])
        return ModelConfig(**echo)
    except (KeyError, TypeError) as exc:
        raise ModelError(f"bad model configuration echo: {exc}") from exc
