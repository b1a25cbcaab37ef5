"""Clip and dataset extraction: media files in, AVRE files out."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .audio import AudioError, load_wav
from .avre import AvreError, read_avre, write_avre
from .encoders import EncoderSettings, build_encoders, canonical_pair
from .video import VideoError

EMBEDDING_DIM = 768


class MediaError(ValueError):
    """Undecodable or missing input media."""


@dataclass
class ExtractionRequest:
    video_path: str | Path
    audio_path: str | Path  # wav; demuxing happens upstream
    pair: str = "videomae+ast"
    audio_out: str | Path | None = None  # default: <out_dir>/<stem>.audio.avre
    video_out: str | Path | None = None
    out_dir: str | Path = "."
    settings: EncoderSettings = field(default_factory=EncoderSettings)

    def resolve_outputs(self) -> tuple[Path, Path]:
        stem = Path(self.video_path).stem
        out_dir = Path(self.out_dir)
        audio_out = Path(self.audio_out) if self.audio_out \
            else out_dir / f"{stem}.audio.avre"
        video_out = Path(self.video_out) if self.video_out \
            else out_dir / f"{stem}.video.avre"
        return audio_out, video_out


def extract_clip(request: ExtractionRequest, encoders=None) -> dict:
    """Encode one clip; writes two AVRE files and returns a manifest
    fragment with output paths and provenance.

    `encoders` lets a batch caller reuse loaded models; otherwise they
    are built per the request's pair and settings.
    """
    pair = canonical_pair(request.pair)
    if encoders is None:
        encoders = build_encoders(pair, request.settings)
    audio_enc, video_enc, tags = encoders

    try:
        rate, signal = load_wav(request.audio_path)
    except AudioError as exc:
        raise MediaError(str(exc)) from exc
    audio_vec = audio_enc.encode(signal, rate)
    try:
        video_vec = video_enc.encode(str(request.video_path))
    except VideoError as exc:
        raise MediaError(str(exc)) from exc

    for name, vec in (("audio", audio_vec), ("video", video_vec)):
        if vec.shape != (EMBEDDING_DIM,):
            raise RuntimeError(f"{name} encoder produced dim {vec.shape}, "
                               f"expected {EMBEDDING_DIM}")

    audio_out, video_out = request.resolve_outputs()
    audio_out.parent.mkdir(parents=True, exist_ok=True)
    video_out.parent.mkdir(parents=True, exist_ok=True)
    write_avre(audio_out, "audio", tags["audio"], audio_vec)
    write_avre(video_out, "video", tags["video"], video_vec)
    return {
        "clip_id": Path(request.video_path).stem,
        "audio_path": str(audio_out),
        "video_path": str(video_out),
        "provenance": {
            "pair": pair,
            "audio": audio_enc.provenance(),
            "video": video_enc.provenance(),
        },
    }


def _valid_avre(path: Path, modality: str) -> bool:
    try:
        mod, _, values = read_avre(path)
    except (OSError, AvreError):
        return False
    return mod == modality and values.size == EMBEDDING_DIM


def extract_dataset(manifest_path: str | Path, out_dir: str | Path,
                    pair: str = "videomae+ast",
                    settings: EncoderSettings | None = None) -> dict:
    """Batch wrapper over extract_clip.

    The input manifest lists raw clips: {"clips": [{clip_id, label,
    video, audio}, ...]}, paths relative to the manifest. Existing
    valid outputs are skipped, so reruns resume; per-clip failures are
    collected in the returned report instead of aborting the batch.
    Writes an embedding-dataset manifest usable by the classifier.
    """
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text())
    base = manifest_path.parent
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    settings = settings or EncoderSettings()

    encoders = None
    rows, errors, skipped = [], [], 0
    for entry in doc.get("clips", []):
        clip_id = entry["clip_id"]
        audio_out = out_dir / f"{clip_id}.audio.avre"
        video_out = out_dir / f"{clip_id}.video.avre"
        row = {"clip_id": clip_id, "label": entry["label"],
               "audio_path": audio_out.name, "video_path": video_out.name}
        if _valid_avre(audio_out, "audio") and _valid_avre(video_out, "video"):
            rows.append(row)
            skipped += 1
            continue
        if encoders is None:  # lazy: an all-skipped rerun loads nothing
            encoders = build_encoders(pair, settings)
        request = ExtractionRequest(
            video_path=base / entry["video"], audio_path=base / entry["audio"],
            pair=pair, audio_out=audio_out, video_out=video_out,
            settings=settings)
        try:
            extract_clip(request, encoders=encoders)
        except (MediaError, OSError) as exc:
            errors.append({"clip_id": clip_id, "error": str(exc)})
            continue
        rows.append(row)

    out_manifest = out_dir / "manifest.json"
    out_manifest.write_text(json.dumps(
        {"name": doc.get("name", manifest_path.stem), "clips": rows},
        indent=2, sort_keys=True))
    return {"manifest": str(out_manifest), "completed": len(rows) - skipped,
            "skipped": skipped, "errors": errors}
