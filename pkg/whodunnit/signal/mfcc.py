"""
Mel-frequency cepstral coefficients and per-sentence acoustic vectors.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fftpack import dct

from whodunnit.errors import AudioError
from whodunnit.signal import constants
from whodunnit.signal.audio import AudioTrack, resample


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MfccConfig:
    """MFCC pipeline parameters."""
    sample_rate: int = constants.SAMPLE_RATE
    window_ms: float = constants.WINDOW_MS
    hop_ms: float = constants.HOP_MS
    n_fft: int = constants.N_FFT
    n_filters: int = constants.N_MEL_FILTERS
    n_mfcc: int = constants.N_MFCC
    pre_emphasis: float = constants.PRE_EMPHASIS
    log_floor: float = constants.LOG_FLOOR

    @property
    def frame_length(self) -> int:
        return int(round(self.window_ms * self.sample_rate / 1000.0))

    @property
    def hop_length(self) -> int:
        return int(round(self.hop_ms * self.sample_rate / 1000.0))

    def frame_center_ms(self, frame: int) -> float:
        return 1000.0 * (frame * self.hop_length + self.frame_length / 2.0) / self.sample_rate


def hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filter_centers(config: MfccConfig = MfccConfig()) -> np.ndarray:
    """Center frequencies (Hz) of the triangular mel filters."""
    points = mel_to_hz(np.linspace(0.0, hz_to_mel(config.sample_rate / 2.0), config.n_filters + 2))
    return points[1:-1]


def mel_filterbank(config: MfccConfig = MfccConfig()) -> np.ndarray:
    """
    Triangular mel filters spanning 0 Hz to Nyquist.

    Returns:
        Array of shape (n_filters, n_fft // 2 + 1)
    """
    points = mel_to_hz(np.linspace(0.0, hz_to_mel(config.sample_rate / 2.0), config.n_filters + 2))
    bin_hz = np.arange(config.n_fft // 2 + 1) * config.sample_rate / config.n_fft
    lower, center, upper = points[:-2, None], points[1:-1, None], points[2:, None]
    rising = (bin_hz[None, :] - lower) / (center - lower)
    falling = (upper - bin_hz[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def _frames(track: AudioTrack, config: MfccConfig) -> np.ndarray:
    track = resample(track, config.sample_rate)
    samples = np.asarray(track.samples, dtype=np.float64)
    if len(samples) < config.frame_length:
        raise AudioError(
            f"track of {len(samples)} samples is shorter than one {config.window_ms:g} ms frame")
    frames = sliding_window_view(samples, config.frame_length)[::config.hop_length].copy()
    # pre-emphasis inside each frame keeps frames independent of their neighbours
    frames[:, 1:] -= config.pre_emphasis * frames[:, :-1].copy()
    return frames


def power_spectrum(track: AudioTrack, config: MfccConfig = MfccConfig()) -> np.ndarray:
    """Per-frame power spectrum of the Hamming-windowed, pre-emphasized frames."""
    frames = _frames(track, config) * np.hamming(config.frame_length)
    return np.square(np.abs(np.fft.rfft(frames, config.n_fft))) / config.n_fft


def filterbank_energies(track: AudioTrack, config: MfccConfig = MfccConfig()) -> np.ndarray:
    """Mel filterbank energies, shape (n_frames, n_filters)."""
    return power_spectrum(track, config) @ mel_filterbank(config).T


def mfcc_frames(track: AudioTrack, config: MfccConfig = MfccConfig()) -> np.ndarray:
    """
    Compute MFCC frames at a fixed hop.

    Each frame: pre-emphasis, Hamming window, power spectrum, mel
    filterbank, natural log with a floor, orthonormal DCT-II, first
    n_mfcc coefficients. There are floor((N - frame_length) / hop) + 1
    frames for N samples.

    Args:
        track: Audio; resampled to config.sample_rate when needed
        config: Pipeline parameters

    Returns:
        Array of shape (n_frames, n_mfcc)

    Raises:
        AudioError: Track shorter than one frame
    """
    energies = filterbank_energies(track, config)
    log_energies = np.log(np.maximum(energies, config.log_floor))
    coefficients = dct(log_energies, type=2, axis=1, norm="ortho")[:, :config.n_mfcc]
    logger.debug("Computed %d MFCC frames", coefficients.shape[0])
    return coefficients


def center_time(start_ms: int, end_ms: int) -> int:
    """Midpoint of a span in milliseconds, rounded down."""
    return (int(start_ms) + int(end_ms)) // 2


def sentence_audio_feature(
    track: AudioTrack,
    start_ms: float,
    end_ms: float,
    frames: Optional[np.ndarray] = None,
    config: MfccConfig = MfccConfig(),
) -> np.ndarray:
    """
    Sample five MFCC frames from a sentence's interval and concatenate them.

    The frames are the ones whose centers lie nearest to the fractions
    k/6 (k = 1..5) of the interval, in chronological order. Short
    intervals reuse frames; a zero-length interval repeats the frame at
    its start.

    Args:
        track: The episode's audio track
        start_ms: Interval start
        end_ms: Interval end
        frames: Precomputed mfcc_frames(track, config), to avoid recomputation
        config: Pipeline parameters

    Returns:
        Vector of FRAMES_PER_SENTENCE * n_mfcc reals

    Raises:
        AudioError: end before start, or interval outside the track
    """
    if end_ms < start_ms:
        raise AudioError(f"interval [{start_ms}, {end_ms}] ends before it starts")
    if start_ms < 0 or end_ms > track.duration_ms + 1e-6:
        raise AudioError(
            f"interval [{start_ms}, {end_ms}] ms lies outside the {track.duration_ms:.1f} ms track")
    if frames is None:
        frames = mfcc_frames(track, config)

    k = np.arange(1, constants.FRAMES_PER_SENTENCE + 1)
    targets = start_ms + k * (end_ms - start_ms) / (constants.FRAMES_PER_SENTENCE + 1)
    first_center = config.frame_center_ms(0)
    hop_ms = 1000.0 * config.hop_length / config.sample_rate
    indices = np.floor((targets - first_center) / hop_ms + 0.5).astype(int)
    indices = np.clip(indices, 0, len(frames) - 1)
    return frames[indices].reshape(-1)
