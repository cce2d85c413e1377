"""
Signal - acoustic, visual and token inputs of the tagger.
"""
from whodunnit.signal.audio import AudioTrack, load_wav, resample, write_wav
from whodunnit.signal.bundle import (
    FeatureBundle,
    featurize_episode,
    group_by_case,
    read_feature_cache,
    write_feature_cache,
)
from whodunnit.signal.mfcc import (
    MfccConfig,
    center_time,
    filterbank_energies,
    mel_filter_centers,
    mfcc_frames,
    sentence_audio_feature,
)
from whodunnit.signal.visual import VisualStore, load_visual_store, visual_feature, write_visual_store
from whodunnit.signal.vocab import Vocab, build_vocab, load_embeddings


__all__ = [
    "AudioTrack",
    "FeatureBundle",
    "MfccConfig",
    "VisualStore",
    "Vocab",
    "build_vocab",
    "center_time",
    "featurize_episode",
    "filterbank_energies",
    "group_by_case",
    "load_embeddings",
    "load_visual_store",
    "load_wav",
    "mel_filter_centers",
    "mfcc_frames",
    "read_feature_cache",
    "resample",
    "sentence_audio_feature",
    "visual_feature",
    "write_feature_cache",
    "write_visual_store",
]
