import cv2
import numpy as np
import pytest
from scipy.io import wavfile

from avrextract import EncoderSettings

# shrunken encoders: same 768-d output, tiny depth and inputs
TINY = EncoderSettings(num_hidden_layers=2, image_size=32, audio_frames=64)


def write_golden_wav(path, rate=44100, seconds=1.0):
    """A 440 Hz tone with a click, int16 wav at the given rate."""
    t = np.arange(int(rate * seconds)) / rate
    signal = 0.5 * np.sin(2 * np.pi * 440 * t)
    signal[rate // 2: rate // 2 + 50] = 0.9
    wavfile.write(path, rate, (signal * 32767).astype(np.int16))
    return path


def write_golden_mp4(path, frames=20, size=64):
    """A short mp4 of moving gradient frames."""
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"mp4v"),
                             10.0, (size, size))
    assert writer.isOpened(), "OpenCV cannot write mp4 in this environment"
    base = np.linspace(0, 255, size, dtype=np.uint8)
    for i in range(frames):
        frame = np.zeros((size, size, 3), np.uint8)
        frame[:, :, 0] = np.roll(base, i * 3)[None, :]
        frame[:, :, 1] = np.roll(base, -i * 2)[:, None]
        frame[:, :, 2] = (i * 12) % 256
        writer.write(frame)
    writer.release()
    return path


@pytest.fixture(scope="session")
def golden_clip(tmp_path_factory):
    """One decodable (mp4, wav) pair shared across the session."""
    root = tmp_path_factory.mktemp("golden")
    return (write_golden_mp4(root / "clip.mp4"),
            write_golden_wav(root / "clip.wav"))
