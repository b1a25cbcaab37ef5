"""Video frame sampling with OpenCV."""
from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

# ImageNet statistics, the convention shared by the video encoders here.
IMAGE_MEAN = np.array([0.485, 0.456, 0.406])
IMAGE_STD = np.array([0.229, 0.224, 0.225])


class VideoError(ValueError):
    pass


def sample_frames(path: str | Path, num_frames: int,
                  image_size: int) -> np.ndarray:
    """Uniformly sample frames; returns float32 (num_frames, 3, H, W),
    RGB, ImageNet-normalized. Short videos repeat their last frame."""
    cap = cv2.VideoCapture(str(path))
    try:
        if not cap.isOpened():
            raise VideoError(f"cannot open video {path}")
        total = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
        frames = []
        if total > 0:
            wanted = np.linspace(0, total - 1, num_frames).round().astype(int)
            for idx in wanted:
                cap.set(cv2.CAP_PROP_POS_FRAMES, int(idx))
                ok, frame = cap.read()
                if not ok:
                    break
                frames.append(frame)
        else:
            # stream without a frame count; read sequentially
            while len(frames) < num_frames:
                ok, frame = cap.read()
                if not ok:
                    break
                frames.append(frame)
    finally:
        cap.release()
    if not frames:
        raise VideoError(f"no decodable frames in {path}")
    while len(frames) < num_frames:
        frames.append(frames[-1])

    out = np.empty((num_frames, 3, image_size, image_size), dtype=np.float32)
    for i, frame in enumerate(frames[:num_frames]):
        rgb = cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
        rgb = cv2.resize(rgb, (image_size, image_size),
                         interpolation=cv2.INTER_AREA)
        norm = (rgb / 255.0 - IMAGE_MEAN) / IMAGE_STD
        out[i] = norm.transpose(2, 0, 1)
    return out
