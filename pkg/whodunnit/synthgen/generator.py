"""
Synthetic multi-case episodes with planted, optionally history-dependent signal.

Every case sentence has two latent flags drawn independently:
``candidate`` (the sentence could name the perpetrator) and ``trigger``
(a trigger token is planted). With history lag k > 0 the sentence at t
names the perpetrator iff it is a candidate and sentence t - k carried
the trigger. With k = 0 candidates name the perpetrator directly.
Enabled channels expose the candidate flag: a marker token (text), a
shifted mean vector (visual) and a higher tone (audio). The trigger
token is always in the text.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from whodunnit.baselines.constants import DEFAULT_PRONOUNS
from whodunnit.corpus.interchange import build_cases, write_case_index, write_interchange
from whodunnit.corpus.types import CrimeType, SentenceKind, SentenceUnit, TokenLabel, case_key
from whodunnit.errors import SynthError
from whodunnit.signal.audio import AudioTrack, write_wav
from whodunnit.signal.constants import EMBEDDING_DIM, SAMPLE_RATE, VISUAL_DIM
from whodunnit.signal.visual import VisualStore, write_visual_store
from whodunnit.synthgen import constants


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthSpec:
    """Shape and signal of a synthetic dataset."""
    n_episodes: int = 200
    cases_per_episode: int = 1
    sentences_per_case: Tuple[int, int] = (60, 60)
    n_characters: Tuple[int, int] = (4, 6)
    perpetrator_mention_rate: float = 0.15
    channels: Tuple[str, ...] = constants.CHANNELS
    history_lag: int = 3
    vocab_size: int = 200
    seed: int = 7
    trigger_rate: float = 0.5
    visual_dim: int = VISUAL_DIM
    visual_separation: float = 4.0
    embedding_dim: int = EMBEDDING_DIM
    pronoun_rate: float = 0.0

    def __post_init__(self):
        if self.n_episodes < 1:
            raise SynthError("n_episodes must be positive")
        if self.cases_per_episode not in (1, 2):
            raise SynthError(f"cases_per_episode must be 1 or 2, got {self.cases_per_episode}")
        low, high = self.sentences_per_case
        if not 1 <= low <= high:
            raise SynthError(f"bad sentences_per_case range {self.sentences_per_case}")
        low_chars, high_chars = self.n_characters
        if not 2 <= low_chars <= high_chars:
            raise SynthError(f"cases need at least two characters, got range {self.n_characters}")
        if high_chars * self.cases_per_episode > len(constants.CHARACTER_NAMES):
            raise SynthError("not enough character names for this many characters per episode")
        if not 0.0 < self.perpetrator_mention_rate < 1.0:
            raise SynthError(f"perpetrator_mention_rate must lie in (0, 1), got {self.perpetrator_mention_rate}")
        unknown = set(self.channels) - set(constants.CHANNELS)
        if unknown:
            raise SynthError(f"unknown channels {sorted(unknown)}")
        if not 0 <= self.history_lag < low:
            raise SynthError(f"history_lag {self.history_lag} must be below the minimum case length {low}")
        if not 0.0 < self.trigger_rate <= 1.0:
            raise SynthError(f"trigger_rate must lie in (0, 1], got {self.trigger_rate}")
        if not 0.0 <= self.pronoun_rate <= 1.0:
            raise SynthError(f"pronoun_rate must lie in [0, 1], got {self.pronoun_rate}")
        if self.vocab_size < 1 or self.visual_dim < 1 or self.embedding_dim < 1:
            raise SynthError("vocab_size, visual_dim and embedding_dim must be positive")
        # the shortest case needs the largest candidate probability
        if self.candidate_rate(low) > 1.0:
            raise SynthError(
                f"rate {self.perpetrator_mention_rate} unreachable with lag {self.history_lag} "
                f"and trigger rate {self.trigger_rate} for {low}-sentence cases")

    def candidate_rate(self, length: int) -> float:
        """Candidate probability that makes the expected label rate equal the target."""
        if self.history_lag == 0:
            return self.perpetrator_mention_rate
        return self.perpetrator_mention_rate * length / ((length - self.history_lag) * self.trigger_rate)

    def has(self, channel: str) -> bool:
        return channel in self.channels

    def to_dict(self) -> dict:
        echo = asdict(self)
        echo["sentences_per_case"] = list(self.sentences_per_case)
        echo["n_characters"] = list(self.n_characters)
        echo["channels"] = list(self.channels)
        return echo

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        try:
            data = dict(data)
            data["sentences_per_case"] = tuple(data["sentences_per_case"])
            data["n_characters"] = tuple(data["n_characters"])
            data["channels"] = tuple(data["channels"])
            return cls(**data)
        except (KeyError, TypeError) as exc:
            raise SynthError(f"bad synthetic spec: {exc}") from exc


@dataclass
class CaseLatents:
    """Per-sentence hidden generator state of one case."""
    candidate: List[bool]
    trigger: List[bool]


@dataclass
class SynthDataset:
    spec: SynthSpec
    units: List[SentenceUnit] = field(default_factory=list)
    crime_types: Dict[str, CrimeType] = field(default_factory=dict)
    latents: Dict[str, CaseLatents] = field(default_factory=dict)
    tracks: Dict[str, AudioTrack] = field(default_factory=dict)
    stores: Dict[str, VisualStore] = field(default_factory=dict)
    embeddings: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def episode_ids(self) -> List[str]:
        return sorted(self.tracks)


def vocabulary(spec: SynthSpec) -> List[str]:
    """Every token the generator can emit."""
    fillers = [f"{constants.FILLER_PREFIX}{index:04d}" for index in range(spec.vocab_size)]
    return (fillers + list(constants.CHARACTER_NAMES)
            + [constants.MARKER_TOKEN, constants.TRIGGER_TOKEN] + list(DEFAULT_PRONOUNS))


def _case_labels(spec: SynthSpec, length: int, rng: np.random.Generator):
    candidate = rng.random(length) < spec.candidate_rate(length)
    trigger = rng.random(length) < spec.trigger_rate
    if spec.history_lag == 0:
        trigger[:] = False
        return candidate, trigger, candidate.copy()
    lag = spec.history_lag
    labels = np.zeros(length, dtype=bool)
    labels[lag:] = candidate[lag:] & trigger[:-lag]
    return candidate, trigger, labels


def _sentence_tokens(spec, rng, name, candidate, trigger):
    tokens = [f"{constants.FILLER_PREFIX}{index:04d}"
              for index in rng.integers(0, spec.vocab_size,
                                        size=rng.integers(constants.FILLER_MIN, constants.FILLER_MAX + 1))]
    tokens.append(name)
    if candidate and spec.has("text"):
        tokens.append(constants.MARKER_TOKEN)
    if trigger:
        tokens.append(constants.TRIGGER_TOKEN)
    if spec.pronoun_rate > 0 and rng.random() < spec.pronoun_rate:
        tokens.append(DEFAULT_PRONOUNS[rng.integers(len(DEFAULT_PRONOUNS))])
    return [tokens[index] for index in rng.permutation(len(tokens))]


def _generate_episode(spec: SynthSpec, episode_index: int, direction: np.ndarray, dataset: SynthDataset) -> None:
    rng = np.random.default_rng([spec.seed, 1, episode_index])
    episode_id = f"synth{episode_index:04d}"
    n_cases = spec.cases_per_episode
    cast = rng.permutation(len(constants.CHARACTER_NAMES))

    # per case: characters, perpetrator, latent flags and labels
    plans = []
    used = 0
    for case_id in range(1, n_cases + 1):
        n_chars = int(rng.integers(spec.n_characters[0], spec.n_characters[1] + 1))
        names = [constants.CHARACTER_NAMES[index] for index in cast[used:used + n_chars]]
        used += n_chars
        length = int(rng.integers(spec.sentences_per_case[0], spec.sentences_per_case[1] + 1))
        candidate, trigger, labels = _case_labels(spec, length, rng)
        plans.append((case_id, names, candidate, trigger, labels))
        dataset.latents[case_key(episode_id, case_id)] = CaseLatents(
            candidate=[bool(flag) for flag in candidate], trigger=[bool(flag) for flag in trigger])
        dataset.crime_types[case_key(episode_id, case_id)] = list(CrimeType)[int(rng.integers(len(CrimeType)))]

    # interleave the cases' sentences in a random order that keeps each case's order
    owners = np.concatenate([np.full(len(plan[4]), index) for index, plan in enumerate(plans)])
    owners = owners[rng.permutation(len(owners))]
    cursors = [0] * n_cases

    n_slots = len(owners)
    slot = int(SAMPLE_RATE * constants.SLOT_MS / 1000)
    tone = int(SAMPLE_RATE * constants.TONE_MS / 1000)
    samples = rng.normal(0.0, constants.NOISE_STD, size=(n_slots + 1) * slot)
    visual = {}
    for position, owner in enumerate(owners):
        case_id, names, candidate, trigger, labels = plans[owner]
        t = cursors[owner]
        cursors[owner] += 1
        perpetrator, others = names[0], names[1:]
        label = bool(labels[t])
        name = perpetrator if label else others[int(rng.integers(len(others)))]
        tokens = _sentence_tokens(spec, rng, name, bool(candidate[t]), bool(trigger[t]))
        token_labels = []
        for token in tokens:
            if token == perpetrator and token == name:
                token_labels.append(TokenLabel.PERPETRATOR)
            elif token == name:
                suspect = others.index(name) < max(1, len(others) // 2)
                token_labels.append(TokenLabel.SUSPECT if suspect else TokenLabel.OTHER)
            else:
                token_labels.append(TokenLabel.NONE)
        is_utterance = rng.random() < constants.UTTERANCE_SHARE
        start_ms = position * constants.SLOT_MS
        end_ms = start_ms + constants.TONE_MS
        dataset.units.append(SentenceUnit(
            episode_id=episode_id,
            case_id=case_id,
            seq_index=position,
            kind=SentenceKind.UTTERANCE if is_utterance else SentenceKind.SCENE_DESCRIPTION,
            speaker=names[int(rng.integers(len(names)))].upper() if is_utterance else None,
            tokens=tokens,
            token_labels=token_labels,
            gold_label=int(label),
            start_ms=start_ms,
            end_ms=end_ms,
        ))

        signal = bool(candidate[t])
        frequency = constants.SIGNAL_HZ if signal and spec.has("audio") else constants.PLAIN_HZ
        offset = position * slot
        times = np.arange(tone) / SAMPLE_RATE
        samples[offset:offset + tone] += constants.TONE_AMPLITUDE * np.sin(2.0 * np.pi * frequency * times)

        sign = 1.0 if signal and spec.has("visual") else -1.0
        mean = sign * spec.visual_separation / 2.0 * direction
        visual[start_ms + constants.TONE_MS // 2] = mean + rng.normal(0.0, 1.0, size=spec.visual_dim)

    dataset.tracks[episode_id] = AudioTrack(samples=np.clip(samples, -1.0, 1.0), sample_rate=SAMPLE_RATE)
    dataset.stores[episode_id] = VisualStore.from_mapping(visual, spec.visual_dim)


def generate(spec: SynthSpec) -> SynthDataset:
    """
    Generate a dataset; identical specs give identical datasets.

    Raises:
        SynthError: Infeasible spec (raised when the spec is built)
    """
    shared = np.random.default_rng([spec.seed, 0])
    direction = shared.normal(size=spec.visual_dim)
    direction /= np.linalg.norm(direction)
    dataset = SynthDataset(spec=spec)
    for token in vocabulary(spec):
        dataset.embeddings[token] = shared.normal(0.0, constants.EMBEDDING_SCALE, size=spec.embedding_dim)
    for episode_index in range(spec.n_episodes):
        _generate_episode(spec, episode_index, direction, dataset)

    positives = sum(unit.gold_label for unit in dataset.units)
    logger.info("Generated %d episodes, %d sentences, positive rate %.3f",
                spec.n_episodes, len(dataset.units), positives / max(len(dataset.units), 1))
    return dataset


def write_dataset(dataset: SynthDataset, output_dir: Path) -> None:
    """Write the dataset in the formats the pipeline reads."""
    output_dir = Path(output_dir)
    files = constants.DATASET_FILES
    output_dir.mkdir(parents=True, exist_ok=True)
    write_interchange(output_dir / files["corpus"], dataset.units)
    write_case_index(output_dir / files["cases"], build_cases(dataset.units, dataset.crime_types))
    for episode_id in dataset.episode_ids:
        write_wav(output_dir / files["audio_dir"] / f"{episode_id}.wav", dataset.tracks[episode_id])
        write_visual_store(output_dir / files["visual_dir"] / f"{episode_id}.visual", dataset.stores[episode_id])
    with (output_dir / files["embeddings"]).open("w", encoding="utf-8") as handle:
        for token, vector in dataset.embeddings.items():
            handle.write(token + " " + " ".join(f"{v:.8g}" for v in vector) + "\n")
    synth = {
        "spec": dataset.spec.to_dict(),
        "latents": {key: asdict(latents) for key, latents in sorted(dataset.latents.items())},
    }
    (output_dir / files["synth"]).write_text(json.dumps(synth, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("Wrote synthetic dataset to %s", output_dir)


@dataclass
class SynthRecord:
    """What bayes_rate needs from a written dataset: the spec and latent flags."""
    spec: SynthSpec
    latents: Dict[str, CaseLatents]


def load_synth_record(dataset_dir: Path) -> SynthRecord:
    """
    Raises:
        SynthError: The directory holds no synthetic dataset record
    """
    path = Path(dataset_dir) / constants.DATASET_FILES["synth"]
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SynthError(f"{dataset_dir} is not a synthetic dataset: {exc}") from exc
    try:
        latents = {key: CaseLatents(**value) for key, value in data["latents"].items()}
    except (KeyError, TypeError) as exc:
        raise SynthError(f"{path}: bad latent flags") from exc
    return SynthRecord(spec=SynthSpec.from_dict(data["spec"]), latents=latents)
