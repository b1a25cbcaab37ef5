"""Synthetic labeled datasets for demos and sanity checks.

Embeddings are drawn from two 768-d Gaussians whose means differ by a
class-dependent shift, so a linear classifier can reach perfect accuracy
when the shift is large enough.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .embedding_io import EMBEDDING_DIM, EmbeddingRecord, write_embedding, write_manifest


def make_synthetic_dataset(
    out_dir: str | Path,
    n_clips: int = 200,
    seed: int = 0,
    separation: float = 0.25,
    dim: int = EMBEDDING_DIM,
    name: str = "synthetic",
) -> Path:
    """Write AVRE files plus a manifest; returns the manifest path.

    Half the clips get label 1 with all embedding dimensions shifted by
    +separation, the other half label 0 shifted by -separation; noise is
    unit Gaussian.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    clips = []
    for i in range(n_clips):
        label = i % 2
        shift = separation if label == 1 else -separation
        clip_id = f"clip{i:04d}"
        entry = {"clip_id": clip_id, "label": label}
        for modality, extractor in (("audio", "ast"), ("video", "videomae")):
            values = (rng.standard_normal(dim) + shift).astype(np.float32)
            rel = f"{clip_id}.{modality}.avre"
            write_embedding(
                EmbeddingRecord(clip_id, modality, extractor, values),
                out_dir / rel,
                allow_any_dim=dim != EMBEDDING_DIM,
            )
            entry[f"{modality}_path"] = rel
        clips.append(entry)
    manifest = out_dir / "manifest.json"
    write_manifest(manifest, name, clips)
    return manifest
