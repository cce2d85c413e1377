"""
Run configuration: flat ``key = value`` files overridden by ``--key value`` flags.
"""
import difflib
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union, get_args, get_origin

from whodunnit.align.dtw import DEFAULT_SKIP_PENALTY
from whodunnit.baselines.constants import CRF_L2, CRF_TOKENS, MLP_LEARNING_RATE
from whodunnit.errors import ConfigError, ModelError, SynthError
from whodunnit.evaluation.curves import DEFAULT_INTERVALS
from whodunnit.evaluation.splits import HELD_OUT, N_FOLDS, TEST_PER_FOLD
from whodunnit.nn import constants as nn_constants
from whodunnit.nn.config import Modalities, TrainConfig
from whodunnit.signal.constants import EMBEDDING_DIM, MAX_TOKENS, VISUAL_DIM
from whodunnit.synthgen.generator import SynthSpec


logger = logging.getLogger(__name__)

MODELS = ("lstm", "mlp", "crf", "pro")

_TRUE = ("true", "yes", "on", "1")
_FALSE = ("false", "no", "off", "0")


@dataclass(frozen=True)
class RunConfig:
    """Every setting a pipeline command can read."""
    # inputs and outputs
    screenplay_dir: Optional[str] = None
    captions_dir: Optional[str] = None
    corpus: Optional[str] = None
    cases: Optional[str] = None
    embeddings: Optional[str] = None
    audio_dir: Optional[str] = None
    visual_dir: Optional[str] = None
    lexicon: Optional[str] = None
    cache_dir: str = "cache"
    checkpoint_dir: str = "checkpoints"
    output_dir: str = "output"

    # model
    model: str = "lstm"
    modalities: str = "T+V+A"
    conv_widths: str = "3,4,5"
    conv_channels: int = nn_constants.CONV_CHANNELS
    fusion_dim: int = nn_constants.FUSION_DIM
    hidden_dim: int = nn_constants.HIDDEN_DIM
    crf_tokens: int = CRF_TOKENS
    crf_l2: float = CRF_L2
    crf_modalities: str = "T"

    # training
    learning_rate: Optional[float] = None
    epochs: int = nn_constants.EPOCHS
    batch_cases: int = nn_constants.BATCH_CASES
    dropout: float = nn_constants.DROPOUT
    seed: int = 0
    runs: int = nn_constants.RUNS
    beta1: float = nn_constants.ADAM_BETA1
    beta2: float = nn_constants.ADAM_BETA2
    epsilon: float = nn_constants.ADAM_EPSILON

    # splits and reports
    held_out: int = HELD_OUT
    n_folds: int = N_FOLDS
    test_per_fold: int = TEST_PER_FOLD
    n_intervals: int = DEFAULT_INTERVALS

    # features
    skip_penalty: float = DEFAULT_SKIP_PENALTY
    max_tokens: int = MAX_TOKENS
    embedding_dim: int = EMBEDDING_DIM
    visual_dim: int = VISUAL_DIM

    # synthetic data
    synth_episodes: int = 200
    synth_cases_per_episode: int = 1
    synth_min_sentences: int = 60
    synth_max_sentences: int = 60
    synth_min_characters: int = 4
    synth_max_characters: int = 6
    synth_rate: float = 0.15
    synth_channels: str = "text,visual,audio"
    synth_lag: int = 3
    synth_vocab: int = 200
    synth_trigger_rate: float = 0.5
    synth_visual_separation: float = 4.0
    synth_pronoun_rate: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {', '.join(MODELS)}, got {self.model!r}")
        _modalities(self.modalities, "modalities")
        _modalities(self.crf_modalities, "crf_modalities")
        _conv_widths(self.conv_widths)
        for name in ("conv_channels", "fusion_dim", "hidden_dim", "crf_tokens", "max_tokens",
                     "embedding_dim", "visual_dim", "n_intervals"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def modality_set(self) -> Modalities:
        return _modalities(self.modalities, "modalities")

    @property
    def crf_modality_set(self) -> Modalities:
        return _modalities(self.crf_modalities, "crf_modalities")

    @property
    def conv_width_tuple(self) -> Tuple[int, ...]:
        return _conv_widths(self.conv_widths)

    @property
    def resolved_learning_rate(self) -> float:
        """The configured rate, or the model's default (1e-4 for the MLP, 1e-3 otherwise)."""
        if self.learning_rate is not None:
            return self.learning_rate
        return MLP_LEARNING_RATE if self.model == "mlp" else nn_constants.LEARNING_RATE

    @property
    def tag(self) -> str:
        """File-name tag of a (model, modalities) setting, e.g. ``lstm-TVA``."""
        modalities = self.crf_modality_set if self.model == "crf" else self.modality_set
        if self.model == "pro":
            modalities = Modalities(text=True, visual=False, acoustic=False)
        return f"{self.model}-{modalities.label.replace('+', '')}"

    def train_config(self) -> TrainConfig:
        """
        Raises:
            ConfigError: Out-of-range optimization settings
        """
        try:
            return TrainConfig(
                learning_rate=self.resolved_learning_rate,
                epochs=self.epochs,
                batch_cases=self.batch_cases,
                dropout=self.dropout,
                seed=self.seed,
                runs=self.runs,
                beta1=self.beta1,
                beta2=self.beta2,
                epsilon=self.epsilon,
                modalities=self.modality_set,
            )
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc

    def synth_spec(self) -> SynthSpec:
        """
        Raises:
            ConfigError: Infeasible synthetic dataset settings
        """
        channels = tuple(part.strip() for part in self.synth_channels.split(",") if part.strip())
        try:
            return SynthSpec(
                n_episodes=self.synth_episodes,
                cases_per_episode=self.synth_cases_per_episode,
                sentences_per_case=(self.synth_min_sentences, self.synth_max_sentences),
                n_characters=(self.synth_min_characters, self.synth_max_characters),
                perpetrator_mention_rate=self.synth_rate,
                channels=channels,
                history_lag=self.synth_lag,
                vocab_size=self.synth_vocab,
                seed=self.seed,
                trigger_rate=self.synth_trigger_rate,
                visual_dim=self.visual_dim,
                visual_separation=self.synth_visual_separation,
                embedding_dim=self.embedding_dim,
                pronoun_rate=self.synth_pronoun_rate,
            )
        except SynthError as exc:
            raise ConfigError(str(exc)) from exc

    def path(self, name: str) -> Path:
        """
        A configured input path that must exist.

        Raises:
            ConfigError: The key is unset or the path is missing
        """
        value = getattr(self, name)
        if not value:
            raise ConfigError(f"this command needs the {name} setting")
        path = Path(value)
        if not path.exists():
            logger.error("Configured %s does not exist: %s", name, path)
            raise ConfigError(f"{name}: {path} does not exist")
        return path

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _modalities(value: str, key: str) -> Modalities:
    try:
        modalities = Modalities.parse(value)
    except ModelError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    if not modalities.text:
        raise ConfigError(f"{key}: the text modality must be enabled, got {value!r}")
    return modalities


def _conv_widths(value: str) -> Tuple[int, ...]:
    try:
        widths = tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"conv_widths must be a comma list of integers, got {value!r}") from exc
    if not widths or min(widths) < 1:
        raise ConfigError(f"conv_widths must hold positive widths, got {value!r}")
    return widths


def read_config_file(path: Path) -> Dict[str, str]:
    """
    Read ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ConfigError: Unreadable file, a line without ``=`` or a repeated key
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        logger.error("Cannot read config file %s", path)
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    values: Dict[str, str] = {}
    for line_number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value', got {line!r}")
        if key in values:
            raise ConfigError(f"{path}:{line_number}: {key} is set twice")
        values[key] = value.strip()
    logger.debug("Read %d settings from %s", len(values), path)
    return values


def parse_overrides(arguments: Sequence[str]) -> Dict[str, str]:
    """
    Turn ``--key value`` and ``--key=value`` flags into settings.

    Raises:
        ConfigError: A stray argument or a flag without a value
    """
    overrides: Dict[str, str] = {}
    position = 0
    while position < len(arguments):
        flag = arguments[position]
        if not flag.startswith("--") or flag == "--":
            raise ConfigError(f"unexpected argument {flag!r}")
        key, sep, value = flag[2:].partition("=")
        if sep:
            position += 1
        elif position + 1 < len(arguments):
            value = arguments[position + 1]
            position += 2
        else:
            raise ConfigError(f"--{key} needs a value")
        overrides[key.replace("-", "_")] = value
    return overrides


def _coerce(key: str, raw: str, kind: Any) -> Any:
    if get_origin(kind) is Union:
        if raw.lower() in ("", "none"):
            return None
        kind = next(arg for arg in get_args(kind) if arg is not type(None))
    if kind is bool:
        if raw.lower() in _TRUE:
            return True
        if raw.lower() in _FALSE:
            return False
        raise ConfigError(f"{key}: expected true or false, got {raw!r}")
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.__name__}") from exc


def build_run_config(*sources: Mapping[str, str]) -> RunConfig:
    """
    Merge raw settings (later sources win) into a RunConfig.

    Raises:
        ConfigError: Unknown keys or values of the wrong type
    """
    known = {field.name: field.type for field in fields(RunConfig)}
    merged: Dict[str, str] = {}
    for source in sources:
        merged.update(source)

    for key in merged:
        if key not in known:
            close = difflib.get_close_matches(key, known, n=1)
            hint = f"; did you mean {close[0]}?" if close else ""
            logger.error("Unknown configuration key %s", key)
            raise ConfigError(f"unknown configuration key {key!r}{hint}")

    return RunConfig(**{key: _coerce(key, raw, known[key]) for key, raw in merged.items()})


def load_run_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, str]] = None) -> RunConfig:
    """Config file values (if any) overridden by command-line settings."""
    file_values = read_config_file(path) if path is not None else {}
    return build_run_config(file_values, overrides or {})
