#!/usr/bin/env python3
"""
Embedding files, manifests, and stratified folds
================================================

Walks through the on-disk data model: write a few binary embedding
files, describe them in a manifest, load the dataset back, and split
it into stratified cross-validation folds.

Run from the repository root:

    python3 demos/01_embeddings_and_folds.py
"""
import json
import tempfile
from pathlib import Path

import numpy as np

from avhumor.embedding_io import (
    EmbeddingRecord,
    load_dataset,
    make_folds,
    read_embedding,
    write_embedding,
    write_manifest,
)

workdir = Path(tempfile.mkdtemp(prefix="demo01-"))
print(f"working in {workdir}\n")

# Each clip contributes one audio and one video embedding, both 768-d
# float32 vectors stored in a small self-describing binary format.
rng = np.random.default_rng(0)
rows = []
for i in range(10):
    label = i % 2  # 0 = non_humor, 1 = humor
    audio_path = workdir / f"clip{i:02d}.audio.avre"
    video_path = workdir / f"clip{i:02d}.video.avre"
    write_embedding(EmbeddingRecord(
        clip_id=f"clip{i:02d}", modality="audio", extractor="ast",
        values=rng.standard_normal(768).astype(np.float32)), audio_path)
    write_embedding(EmbeddingRecord(
        clip_id=f"clip{i:02d}", modality="video", extractor="videomae",
        values=rng.standard_normal(768).astype(np.float32)), video_path)
    rows.append({"clip_id": f"clip{i:02d}", "label": label,
                 "audio_path": audio_path.name, "video_path": video_path.name})

manifest = workdir / "manifest.json"
write_manifest(manifest, "demo", rows)

# Files are 24 header bytes plus 768 float32 values.
one = workdir / "clip00.audio.avre"
print(f"{one.name}: {one.stat().st_size} bytes on disk")
rec = read_embedding(one)
print(f"  modality={rec.modality} extractor={rec.extractor} dim={rec.dim}")

# The loader validates everything up front: dims, labels, duplicates.
dataset = load_dataset(manifest)
print(f"\nloaded {len(dataset.clips)} clips, "
      f"labels {sorted(set(dataset.labels().tolist()))}")

# Stratified folds: every fold gets its share of both classes, and the
# assignment is a pure function of (dataset, k, seed).
plan = make_folds(dataset, k=5, seed=7)
labels = {c.clip_id: c.label for c in dataset.clips}
for f in range(5):
    ids = plan.fold_ids(f)
    counts = [sum(labels[i] == cls for i in ids) for cls in (0, 1)]
    print(f"fold {f}: {ids}  class counts {counts}")

print("\nfold plan as JSON:")
print(json.dumps(plan.to_dict(), indent=2))
