"""
Small random feature bundles for model tests.
"""
import numpy as np

from whodunnit.nn import Modalities, ModelConfig
from whodunnit.signal import Vocab, featurize_episode, group_by_case
from whodunnit.signal.bundle import FeatureBundle
from whodunnit.signal.constants import PAD_TOKEN, UNK_TOKEN
from whodunnit.synthgen import generate


VOCAB = 12
EMBEDDING = 4
VISUAL = 3
ACOUSTIC = 5
MAX_TOKENS = 6


def tiny_config(modalities="T+V+A", **overrides):
    settings = dict(
        vocab_size=VOCAB,
        embedding_dim=EMBEDDING,
        conv_widths=(2, 3),
        conv_channels=3,
        visual_dim=VISUAL,
        acoustic_dim=ACOUSTIC,
        fusion_dim=12,
        hidden_dim=8,
        modalities=Modalities.parse(modalities),
        init_scale=0.3,
    )
    settings.update(overrides)
    return ModelConfig(**settings)


def random_mini_config(rng):
    """
    A mini model of random shape (vocab <= 50, hidden 8, fusion 12) and
    the sentence length its cases use (at most 8 tokens).
    """
    n_widths = int(rng.integers(1, 4))
    widths = tuple(sorted(int(width) for width in rng.choice([1, 2, 3, 4], size=n_widths, replace=False)))
    config = ModelConfig(
        vocab_size=int(rng.integers(5, 51)),
        embedding_dim=int(rng.integers(2, 7)),
        conv_widths=widths,
        conv_channels=int(rng.integers(2, 5)),
        visual_dim=int(rng.integers(1, 5)),
        acoustic_dim=int(rng.integers(1, 7)),
        fusion_dim=12,
        hidden_dim=8,
        modalities=Modalities.parse(str(rng.choice(["T", "T+V", "T+A", "T+V+A"]))),
        init_scale=0.3,
    )
    return config, int(rng.integers(2, 9))


def case_dims(config, max_tokens=MAX_TOKENS):
    """Keyword arguments that make random_case match a model configuration."""
    return dict(vocab=config.vocab_size, max_tokens=max_tokens,
                visual=config.visual_dim, acoustic=config.acoustic_dim)


def embedding_table(rng, vocab=VOCAB, dim=EMBEDDING):
    table = rng.uniform(-0.5, 0.5, size=(vocab, dim))
    table[0] = 0.0
    return table


def random_case(rng, n_sentences, case_id=1, episode_id="e1", positive_rate=0.3,
                vocab=VOCAB, max_tokens=MAX_TOKENS, visual=VISUAL, acoustic=ACOUSTIC):
    """One case of n_sentences bundles with random tokens, features and labels."""
    case = []
    for seq_index in range(n_sentences):
        length = int(rng.integers(1, max_tokens + 1))
        token_ids = np.zeros(max_tokens, dtype=np.int64)
        token_ids[:length] = rng.integers(1, vocab, size=length)
        token_mask = np.arange(max_tokens) < length
        case.append(FeatureBundle(
            episode_id=episode_id,
            case_id=case_id,
            seq_index=seq_index,
            token_ids=token_ids,
            token_mask=token_mask,
            x_v=rng.normal(size=visual),
            x_a=rng.normal(size=acoustic),
            gold_label=int(rng.random() < positive_rate),
        ))
    return case


def random_cases(rng, n_cases, n_sentences=5, **dims):
    return [random_case(rng, n_sentences, case_id=k + 1, **dims) for k in range(n_cases)]


def synthetic_cases(spec, max_tokens=16):
    """
    Generate a synthetic dataset and featurize it in memory.

    Returns:
        (cases sorted by case key, embedding table, dataset)
    """
    dataset = generate(spec)
    known = sorted(dataset.embeddings)
    vocab = Vocab(tokens=(PAD_TOKEN, UNK_TOKEN, *known), embedding_dim=spec.embedding_dim)
    table = np.zeros((len(vocab), spec.embedding_dim))
    for index, token in enumerate(known, 2):
        table[index] = dataset.embeddings[token]

    by_episode = {}
    for unit in dataset.units:
        by_episode.setdefault(unit.episode_id, []).append(unit)
    cases = []
    for episode_id in dataset.episode_ids:
        bundles = featurize_episode(by_episode[episode_id], vocab, dataset.tracks[episode_id],
                                    dataset.stores[episode_id], max_tokens)
        cases.extend(group_by_case(bundles))
    return cases, table, dataset
