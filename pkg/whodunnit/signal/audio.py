"""
Audio tracks: WAV input/output and resampling.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from whodunnit.errors import AudioError
from whodunnit.signal.constants import SAMPLE_RATE


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AudioTrack:
    """Mono PCM samples in [-1, 1] at a given sample rate."""
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise AudioError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration_ms(self) -> float:
        return 1000.0 * len(self.samples) / self.sample_rate


def resample(track: AudioTrack, sample_rate: int = SAMPLE_RATE) -> AudioTrack:
    """Resample by linear interpolation; returns the track unchanged at the target rate."""
    if track.sample_rate == sample_rate:
        return track
    n_out = int(round(len(track.samples) * sample_rate / track.sample_rate))
    source_times = np.arange(len(track.samples)) / track.sample_rate
    target_times = np.arange(n_out) / sample_rate
    samples = np.interp(target_times, source_times, track.samples.astype(np.float64))
    logger.debug("Resampled %d Hz -> %d Hz (%d samples)", track.sample_rate, sample_rate, n_out)
    return AudioTrack(samples=samples, sample_rate=sample_rate)


def load_wav(path: Path, sample_rate: int = SAMPLE_RATE) -> AudioTrack:
    """
    Load a 16-bit PCM WAV file as a mono track at sample_rate.

    Stereo channels are averaged.

    Raises:
        AudioError: Unreadable file or a sample format other than 16-bit PCM
    """
    try:
        rate, data = wavfile.read(str(path))
    except (OSError, ValueError) as exc:
        logger.error("Failed to read WAV %s: %s", path, exc)
        raise AudioError(f"cannot read WAV file {path}: {exc}") from exc
    if data.dtype != np.int16:
        raise AudioError(f"{path}: expected 16-bit PCM, got {data.dtype}")
    samples = data.astype(np.float64) / 32768.0
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return resample(AudioTrack(samples=samples, sample_rate=int(rate)), sample_rate)


def write_wav(path: Path, track: AudioTrack) -> None:
    """Write a track as 16-bit mono PCM."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pcm = np.clip(np.round(track.samples * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(str(path), track.sample_rate, pcm)
    logger.debug("Wrote %s (%.1f s)", path, track.duration_ms / 1000.0)
