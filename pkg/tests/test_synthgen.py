"""
Tests for the synthetic episode generator and its Bayes-rate oracle.
"""
from collections import Counter

import numpy as np
import pytest

from whodunnit.baselines import pro_predict
from whodunnit.corpus import TokenLabel, build_cases, read_interchange
from whodunnit.corpus.types import case_key
from whodunnit.errors import SynthError
from whodunnit.evaluation import prf_from_labels
from whodunnit.signal import load_visual_store, load_wav, visual_feature
from whodunnit.synthgen import SynthSpec, bayes_rate, generate, load_synth_record, write_dataset
from whodunnit.synthgen.constants import MARKER_TOKEN, TRIGGER_TOKEN


def small_spec(**overrides):
    settings = dict(
        n_episodes=4,
        sentences_per_case=(20, 20),
        vocab_size=20,
        visual_dim=8,
        embedding_dim=6,
        seed=11,
    )
    settings.update(overrides)
    return SynthSpec(**settings)


def labels_by_case(dataset):
    cases = {}
    for unit in dataset.units:
        cases.setdefault(case_key(unit.episode_id, unit.case_id), []).append(unit)
    return cases


class TestSynthSpec:
    """Tests for SynthSpec validation."""

    @pytest.mark.parametrize("settings", [
        {"perpetrator_mention_rate": 0.0},
        {"perpetrator_mention_rate": 1.0},
        {"history_lag": 20},
        {"cases_per_episode": 3},
        {"channels": ("text", "smell")},
        {"n_characters": (1, 3)},
        {"trigger_rate": 0.0},
        {"n_episodes": 0},
        {"perpetrator_mention_rate": 0.9, "history_lag": 3, "trigger_rate": 0.5},
    ])
    def test_rejects(self, settings):
        """Test that invalid or infeasible specs raise SynthError."""
        with pytest.raises(SynthError):
            small_spec(**settings)

    def test_candidate_rate(self):
        """Test the candidate probability that hits the target label rate."""
        spec = small_spec(perpetrator_mention_rate=0.15, history_lag=3, trigger_rate=0.5)
        assert spec.candidate_rate(20) == pytest.approx(0.15 * 20 / (17 * 0.5))
        assert small_spec(history_lag=0).candidate_rate(20) == pytest.approx(0.15)

    def test_dict_form(self):
        """Test that the JSON-ready echo restores the spec."""
        spec = small_spec(channels=("text", "audio"))
        assert SynthSpec.from_dict(spec.to_dict()) == spec


class TestGenerate:
    """Tests for generate and write_dataset functions."""

    def test_byte_identical(self, tmp_path):
        """Test that the same spec writes the same bytes."""
        spec = small_spec()
        write_dataset(generate(spec), tmp_path / "a")
        write_dataset(generate(spec), tmp_path / "b")
        first = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        second = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert first == second
        assert len(first) == 4 + 2 * spec.n_episodes
        for relative in first:
            assert (tmp_path / "a" / relative).read_bytes() == (tmp_path / "b" / relative).read_bytes()

    def test_seed_changes_data(self):
        """Test that another seed gives other sentences."""
        first = generate(small_spec(seed=1))
        second = generate(small_spec(seed=2))
        assert [u.tokens for u in first.units] != [u.tokens for u in second.units]

    @pytest.mark.slow
    def test_positive_rate(self):
        """Test the empirical label rate on 1200 sentences."""
        dataset = generate(small_spec(n_episodes=60))
        rate = np.mean([unit.gold_label for unit in dataset.units])
        assert len(dataset.units) == 1200
        assert rate == pytest.approx(0.15, abs=0.05)

    def test_labels_follow_the_trigger(self):
        """Test that a positive sentence names the perpetrator and follows a trigger k sentences back."""
        dataset = generate(small_spec(history_lag=3))
        for key, units in labels_by_case(dataset).items():
            latents = dataset.latents[key]
            for t, unit in enumerate(units):
                mentions = TokenLabel.PERPETRATOR in unit.token_labels
                assert bool(unit.gold_label) == mentions
                assert (TRIGGER_TOKEN in unit.tokens) == latents.trigger[t]
                assert (MARKER_TOKEN in unit.tokens) == latents.candidate[t]
                if unit.gold_label:
                    assert t >= 3 and latents.trigger[t - 3] and latents.candidate[t]

    def test_one_perpetrator_per_case(self):
        """Test that every case has a single perpetrator name."""
        dataset = generate(small_spec())
        for units in labels_by_case(dataset).values():
            names = {
                token
                for unit in units
                for token, label in zip(unit.tokens, unit.token_labels)
                if label == TokenLabel.PERPETRATOR
            }
            assert len(names) <= 1

    def test_two_cases_interleaved(self):
        """Test two cases per episode with disjoint casts and per-case order."""
        dataset = generate(small_spec(cases_per_episode=2, n_characters=(3, 4)))
        per_episode = Counter(unit.episode_id for unit in dataset.units)
        assert set(per_episode.values()) == {40}
        cases = build_cases(dataset.units)
        assert len(cases) == 2 * 4
        for case in cases:
            assert len(case.sentences) == 20
            positions = [unit.seq_index for unit in case.sentences]
            assert positions == sorted(positions)

    def test_text_channel_off(self):
        """Test that without the text channel no marker token is planted."""
        dataset = generate(small_spec(channels=("visual", "audio")))
        assert not any(MARKER_TOKEN in unit.tokens for unit in dataset.units)

    @pytest.mark.slow
    @pytest.mark.parametrize("channels,separated", [
        (("text", "visual", "audio"), True),
        (("text", "audio"), False),
    ])
    def test_visual_channel(self, channels, separated):
        """Test that visual vectors separate candidates only when the channel is on."""
        dataset = generate(small_spec(n_episodes=60, channels=channels))
        groups = {True: [], False: []}
        for key, units in labels_by_case(dataset).items():
            store = dataset.stores[units[0].episode_id]
            for t, unit in enumerate(units):
                groups[dataset.latents[key].candidate[t]].append(visual_feature(store, unit.start_ms + 100))
        gap = np.linalg.norm(np.mean(groups[True], axis=0) - np.mean(groups[False], axis=0))
        if separated:
            assert gap > 3.0
        else:
            assert gap < 1.0

    def test_written_formats_load(self, tmp_path):
        """Test that the written corpus, audio and visual stores read back."""
        spec = small_spec(n_episodes=2)
        dataset = generate(spec)
        write_dataset(dataset, tmp_path)
        units = read_interchange(tmp_path / "corpus.jsonl")
        assert len(units) == len(dataset.units)
        assert all(unit.is_timed for unit in units)
        track = load_wav(tmp_path / "audio" / "synth0000.wav")
        assert track.duration_ms >= units[19].end_ms
        store = load_visual_store(tmp_path / "visual" / "synth0000.visual", dim=8)
        assert len(store.times_ms) == 20

    def test_pronoun_profile(self):
        """Test PRO's low precision and high recall when pronouns are planted in most sentences."""
        dataset = generate(small_spec(n_episodes=30, pronoun_rate=0.9))
        predicted = pro_predict(dataset.units)
        scores = prf_from_labels(predicted, [unit.gold_label for unit in dataset.units])
        assert scores.recall >= 2 * scores.precision


class TestBayesRate:
    """Tests for bayes_rate function."""

    def test_no_history(self):
        """Test that with lag 0 both predictors reach f1 1."""
        dataset = generate(small_spec(history_lag=0))
        assert bayes_rate(dataset, memoryless=True) == pytest.approx(1.0)
        assert bayes_rate(dataset, memoryless=False) == pytest.approx(1.0)

    def test_history_matters(self):
        """Test that with lag 3 the memoryless rate is strictly lower."""
        dataset = generate(small_spec(history_lag=3, n_episodes=10))
        memoryless = bayes_rate(dataset, memoryless=True)
        full = bayes_rate(dataset, memoryless=False)
        assert memoryless < full
        assert full == pytest.approx(1.0)

    def test_deterministic(self):
        """Test that repeated calls agree."""
        dataset = generate(small_spec())
        assert bayes_rate(dataset, True) == bayes_rate(dataset, True)

    def test_from_record(self, tmp_path):
        """Test the rate computed from a written dataset record."""
        dataset = generate(small_spec())
        write_dataset(dataset, tmp_path)
        record = load_synth_record(tmp_path)
        assert record.spec == dataset.spec
        assert bayes_rate(record, memoryless=True) == bayes_rate(dataset, memoryless=True)

    def test_not_synthetic(self, tmp_path):
        """Test that non-synthetic input raises SynthError."""
        with pytest.raises(SynthError):
            bayes_rate(["not", "a", "dataset"], memoryless=True)
        with pytest.raises(SynthError):
            load_synth_record(tmp_path)
