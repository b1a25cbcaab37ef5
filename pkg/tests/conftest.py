import numpy as np
import pytest

from avhumor.embedding_io import EmbeddingRecord, write_embedding, write_manifest


def build_dataset_files(out_dir, labels, dim=768, seed=0):
    """Write AVRE files + manifest for synthetic clips with given labels.

    Returns the manifest path.
    """
    rng = np.random.default_rng(seed)
    clips = []
    for i, label in enumerate(labels):
        clip_id = f"c{i:03d}"
        entry = {"clip_id": clip_id, "label": int(label)}
        for modality, extractor in (("audio", "ast"), ("video", "videomae")):
            values = rng.standard_normal(dim).astype(np.float32)
            rel = f"{clip_id}.{modality}.avre"
            write_embedding(
                EmbeddingRecord(clip_id, modality, extractor, values),
                out_dir / rel,
                allow_any_dim=dim != 768,
            )
            entry[f"{modality}_path"] = rel
        clips.append(entry)
    manifest = out_dir / "manifest.json"
    write_manifest(manifest, "test-dataset", clips)
    return manifest


@pytest.fixture
def tiny_manifest(tmp_path):
    """12 clips, 6 per class."""
    return build_dataset_files(tmp_path, [0, 1] * 6)
