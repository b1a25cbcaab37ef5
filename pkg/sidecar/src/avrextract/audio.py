"""Audio loading, resampling, and log-mel features.

All audio is resampled to 16 kHz before feature extraction. The
resampler notifies registered observers with every conversion it
performs, so tests can assert the 16 kHz contract from the outside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly, stft

TARGET_RATE = 16000


class AudioError(ValueError):
    pass


@dataclass(frozen=True)
class ResampleEvent:
    orig_rate: int
    target_rate: int
    in_samples: int
    out_samples: int


_observers: list[Callable[[ResampleEvent], None]] = []


def add_resample_observer(fn: Callable[[ResampleEvent], None]) -> None:
    _observers.append(fn)


def remove_resample_observer(fn: Callable[[ResampleEvent], None]) -> None:
    _observers.remove(fn)


def load_wav(path: str | Path) -> tuple[int, np.ndarray]:
    """Load a wav file as mono float64 in [-1, 1] plus its sample rate."""
    try:
        rate, data = wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise AudioError(f"cannot read wav {path}: {exc}") from exc
    if data.size == 0:
        raise AudioError(f"{path}: empty audio")
    if data.ndim == 2:
        data = data.mean(axis=1)
    if np.issubdtype(data.dtype, np.integer):
        data = data / float(np.iinfo(data.dtype).max)
    return int(rate), data.astype(np.float64)


def resample_to(signal: np.ndarray, orig_rate: int,
                target_rate: int = TARGET_RATE) -> np.ndarray:
    """Polyphase resample; a no-op (but still observed) at equal rates."""
    if orig_rate <= 0:
        raise AudioError(f"invalid sample rate {orig_rate}")
    if orig_rate == target_rate:
        out = signal
    else:
        g = math.gcd(orig_rate, target_rate)
        out = resample_poly(signal, target_rate // g, orig_rate // g)
    event = ResampleEvent(orig_rate, target_rate, len(signal), len(out))
    for fn in _observers:
        fn(event)
    return out


def _mel_filterbank(n_mels: int, n_fft: int, rate: int) -> np.ndarray:
    """Triangular mel filters, shape (n_mels, n_fft // 2 + 1)."""
    hz_to_mel = lambda f: 2595.0 * np.log10(1.0 + f / 700.0)
    mel_to_hz = lambda m: 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    mel_pts = np.linspace(hz_to_mel(0.0), hz_to_mel(rate / 2), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    bins = np.floor((n_fft + 1) * hz_pts / rate).astype(int)
    bank = np.zeros((n_mels, n_fft // 2 + 1))
    for m in range(1, n_mels + 1):
        lo, mid, hi = bins[m - 1], bins[m], bins[m + 1]
        for k in range(lo, mid):
            bank[m - 1, k] = (k - lo) / max(mid - lo, 1)
        for k in range(mid, hi):
            bank[m - 1, k] = (hi - k) / max(hi - mid, 1)
    return bank


def log_mel_features(signal: np.ndarray, rate: int, n_mels: int,
                     n_frames: int) -> np.ndarray:
    """Standardized log-mel spectrogram, shape (n_frames, n_mels).

    25 ms windows with 10 ms hop at the given rate; padded or trimmed
    in time to exactly n_frames.
    """
    nperseg = int(rate * 0.025)
    hop = int(rate * 0.010)
    _, _, z = stft(signal, fs=rate, nperseg=nperseg,
                   noverlap=nperseg - hop, boundary=None, padded=True)
    power = np.abs(z) ** 2
    mel = _mel_filterbank(n_mels, nperseg, rate) @ power
    feats = np.log(mel + 1e-10).T
    if feats.shape[0] >= n_frames:
        feats = feats[:n_frames]
    else:
        pad = np.full((n_frames - feats.shape[0], n_mels), np.log(1e-10))
        feats = np.concatenate([feats, pad], axis=0)
    return (feats - feats.mean()) / (feats.std() + 1e-8)
