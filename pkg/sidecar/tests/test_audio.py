import numpy as np
import pytest

from avrextract.audio import (
    AudioError,
    add_resample_observer,
    load_wav,
    log_mel_features,
    remove_resample_observer,
    resample_to,
)
from tests.conftest import write_golden_wav


@pytest.fixture
def events():
    seen = []
    add_resample_observer(seen.append)
    yield seen
    remove_resample_observer(seen.append)


class TestLoadWav:
    def test_int16_scaled_to_unit_range(self, tmp_path):
        rate, data = load_wav(write_golden_wav(tmp_path / "g.wav"))
        assert rate == 44100
        assert data.dtype == np.float64
        assert np.abs(data).max() <= 1.0

    def test_stereo_downmixed(self, tmp_path):
        from scipy.io import wavfile
        stereo = np.stack([np.ones(100), -np.ones(100)], axis=1)
        wavfile.write(tmp_path / "s.wav", 8000, stereo.astype(np.float32))
        _, data = load_wav(tmp_path / "s.wav")
        assert data.shape == (100,)
        assert np.allclose(data, 0.0)

    def test_garbage_rejected(self, tmp_path):
        bad = tmp_path / "bad.wav"
        bad.write_bytes(b"not a wav")
        with pytest.raises(AudioError):
            load_wav(bad)


class TestResample:
    def test_44k_to_16k_length_and_event(self, events):
        signal = np.sin(np.linspace(0, 100, 44100))
        out = resample_to(signal, 44100)
        assert abs(len(out) - 16000) <= 2
        assert events == [e for e in events]
        (event,) = events
        assert event.orig_rate == 44100
        assert event.target_rate == 16000
        assert event.in_samples == 44100
        assert event.out_samples == len(out)

    def test_equal_rate_is_identity_but_observed(self, events):
        signal = np.ones(16000)
        out = resample_to(signal, 16000)
        assert out is signal
        assert events[0].orig_rate == events[0].target_rate == 16000

    def test_tone_frequency_preserved(self):
        # a 440 Hz tone should still peak near 440 Hz after resampling
        rate = 44100
        t = np.arange(rate) / rate
        out = resample_to(np.sin(2 * np.pi * 440 * t), rate)
        spectrum = np.abs(np.fft.rfft(out))
        peak_hz = np.argmax(spectrum) * 16000 / len(out)
        assert abs(peak_hz - 440) < 5

    def test_bad_rate_rejected(self):
        with pytest.raises(AudioError):
            resample_to(np.ones(10), 0)


class TestLogMel:
    def test_shape_and_standardization(self):
        rng = np.random.default_rng(0)
        feats = log_mel_features(rng.standard_normal(16000), 16000,
                                 n_mels=16, n_frames=64)
        assert feats.shape == (64, 16)
        assert abs(feats.mean()) < 1e-6
        assert abs(feats.std() - 1.0) < 1e-3

    def test_short_signal_padded(self):
        feats = log_mel_features(np.ones(1600), 16000, n_mels=8, n_frames=100)
        assert feats.shape == (100, 8)
        assert np.all(np.isfinite(feats))
