"""Foundation-model encoders producing one 768-d vector per modality.

Each encoder loads pretrained weights from a local directory when one
is given; otherwise it builds the architecture from its config with a
fixed seed (deterministic random init) so the pipeline stays runnable
offline. Provenance records which mode produced an embedding, the
preprocessing parameters, and the pooling rule (mean over tokens).
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
import torch

from .audio import TARGET_RATE, log_mel_features, resample_to
from .video import sample_frames

PAIRS = ("videomae+ast", "languagebind")
_CANONICAL = {"videomae-ast": "videomae+ast", "videomae+ast": "videomae+ast",
              "languagebind": "languagebind"}


class ModelLoadError(RuntimeError):
    pass


def canonical_pair(pair: str) -> str:
    key = pair.lower()
    if key not in _CANONICAL:
        raise ValueError(f"unknown extractor pair {pair!r}; "
                         f"expected one of {sorted(set(_CANONICAL))}")
    return _CANONICAL[key]


@dataclass(frozen=True)
class EncoderSettings:
    """Checkpoint locations plus optional size overrides.

    The overrides shrink the config-built architectures (fewer layers,
    smaller inputs) without changing the 768-d output; they exist for
    fast tests and have no effect when a checkpoint is loaded.
    """
    audio_checkpoint: str | None = None
    video_checkpoint: str | None = None
    num_hidden_layers: int | None = None
    image_size: int | None = None
    audio_frames: int | None = None
    device: str = "cpu"


def _build(model_cls, config_cls, checkpoint: str | None, seed: int,
           device: str, **config_overrides):
    try:
        if checkpoint:
            model = model_cls.from_pretrained(checkpoint)
            source = f"checkpoint:{checkpoint}"
        else:
            config = config_cls(**config_overrides)
            torch.manual_seed(seed)
            model = model_cls(config)
            source = "random_init"
    except Exception as exc:
        raise ModelLoadError(f"cannot build {model_cls.__name__}: {exc}") from exc
    return model.to(device).eval(), source


class AudioEncoder:
    """Spectrogram transformer over log-mel features (16 kHz input)."""

    def __init__(self, settings: EncoderSettings, extractor_tag: str):
        from transformers import ASTConfig, ASTModel

        overrides = {}
        if settings.num_hidden_layers:
            overrides["num_hidden_layers"] = settings.num_hidden_layers
        if settings.audio_frames:
            overrides["max_length"] = settings.audio_frames
        self.model, self.source = _build(
            ASTModel, ASTConfig, settings.audio_checkpoint,
            seed=zlib.crc32(f"audio:{extractor_tag}".encode()),
            device=settings.device, **overrides)
        self.extractor_tag = extractor_tag
        self.device = settings.device

    def encode(self, signal: np.ndarray, rate: int) -> np.ndarray:
        signal = resample_to(signal, rate, TARGET_RATE)
        cfg = self.model.config
        feats = log_mel_features(signal, TARGET_RATE,
                                 n_mels=cfg.num_mel_bins,
                                 n_frames=cfg.max_length)
        x = torch.from_numpy(feats[None].astype(np.float32)).to(self.device)
        with torch.no_grad():
            hidden = self.model(input_values=x).last_hidden_state
        return hidden.mean(dim=1)[0].cpu().numpy()

    def provenance(self) -> dict:
        cfg = self.model.config
        return {"architecture": type(self.model).__name__,
                "weights": self.source, "pooling": "token_mean",
                "sample_rate": TARGET_RATE,
                "num_mel_bins": cfg.num_mel_bins,
                "num_frames": cfg.max_length}


class VideoEncoder:
    """Video transformer over uniformly sampled frames."""

    def __init__(self, settings: EncoderSettings, extractor_tag: str):
        seed = zlib.crc32(f"video:{extractor_tag}".encode())
        overrides = {}
        if settings.num_hidden_layers:
            overrides["num_hidden_layers"] = settings.num_hidden_layers
        if settings.image_size:
            overrides["image_size"] = settings.image_size
        if extractor_tag == "videomae":
            from transformers import VideoMAEConfig, VideoMAEModel
            self.model, self.source = _build(
                VideoMAEModel, VideoMAEConfig, settings.video_checkpoint,
                seed=seed, device=settings.device, **overrides)
            self.per_frame = False
        else:
            # image encoder applied per frame, then mean-pooled
            from transformers import CLIPVisionConfig, CLIPVisionModel
            self.model, self.source = _build(
                CLIPVisionModel, CLIPVisionConfig, settings.video_checkpoint,
                seed=seed, device=settings.device, **overrides)
            self.per_frame = True
        self.extractor_tag = extractor_tag
        self.device = settings.device

    @property
    def num_frames(self) -> int:
        return getattr(self.model.config, "num_frames", 8)

    def encode(self, video_path: str) -> np.ndarray:
        cfg = self.model.config
        frames = sample_frames(video_path, self.num_frames, cfg.image_size)
        with torch.no_grad():
            if self.per_frame:
                x = torch.from_numpy(frames).to(self.device)  # (T,3,H,W)
                hidden = self.model(pixel_values=x).last_hidden_state
                return hidden.mean(dim=(0, 1)).cpu().numpy()
            x = torch.from_numpy(frames[None]).to(self.device)  # (1,T,3,H,W)
            hidden = self.model(pixel_values=x).last_hidden_state
            return hidden.mean(dim=1)[0].cpu().numpy()

    def provenance(self) -> dict:
        cfg = self.model.config
        return {"architecture": type(self.model).__name__,
                "weights": self.source, "pooling": "token_mean",
                "num_frames": self.num_frames,
                "image_size": cfg.image_size}


def build_encoders(pair: str,
                   settings: EncoderSettings | None = None
                   ) -> tuple[AudioEncoder, VideoEncoder, dict]:
    """Encoders for one extractor pair plus the AVRE enum tags.

    Returns (audio_encoder, video_encoder, tags) where tags maps
    "audio"/"video" to the extractor enum names used in AVRE headers.
    """
    pair = canonical_pair(pair)
    settings = settings or EncoderSettings()
    if pair == "videomae+ast":
        tags = {"audio": "ast", "video": "videomae"}
    else:
        tags = {"audio": "languagebind_audio", "video": "languagebind_video"}
    return (AudioEncoder(settings, tags["audio"]),
            VideoEncoder(settings, tags["video"]),
            tags)
