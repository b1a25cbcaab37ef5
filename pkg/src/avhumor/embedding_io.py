"""AVRE embedding files, dataset manifests, and fold planning.

AVRE is a small self-describing binary container for one embedding vector:

    bytes 0-3    magic ASCII "AVRE"
    bytes 4-7    version, u32 little-endian (currently 1)
    byte  8      modality: 0 = audio, 1 = video
    byte  9      extractor: 0 = ast, 1 = videomae,
                 2 = languagebind_audio, 3 = languagebind_video
    bytes 10-11  reserved, zero
    bytes 12-15  dim, u32 little-endian
    bytes 16-23  reserved, zero
    bytes 24-    dim IEEE-754 binary32 values, little-endian

A dataset manifest is a JSON document {name, clips: [{clip_id, label,
audio_path, video_path}]} with paths relative to the manifest's directory.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import SplitMix64, fnv1a64

MAGIC = b"AVRE"
VERSION = 1
HEADER_SIZE = 24
EMBEDDING_DIM = 768

MODALITIES = ("audio", "video")
EXTRACTORS = ("ast", "videomae", "languagebind_audio", "languagebind_video")

LABEL_NAMES = ("non_humor", "humor")  # index == integer label


class EmbeddingFormatError(ValueError):
    """Raised for malformed AVRE files or invalid embedding records."""


class DatasetError(ValueError):
    """Raised for manifest/dataset validation failures."""


@dataclass
class EmbeddingRecord:
    clip_id: str
    modality: str
    extractor: str
    values: np.ndarray  # float32, shape (dim,)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def validate(self, expected_dim: int | None = EMBEDDING_DIM) -> None:
        if self.modality not in MODALITIES:
            raise EmbeddingFormatError(f"unknown modality {self.modality!r}")
        if self.extractor not in EXTRACTORS:
            raise EmbeddingFormatError(f"unknown extractor {self.extractor!r}")
        if self.values.ndim != 1 or self.values.size == 0:
            raise EmbeddingFormatError("values must be a non-empty 1-d vector")
        bad = np.flatnonzero(~np.isfinite(self.values))
        if bad.size:
            raise EmbeddingFormatError(f"non-finite value at index {int(bad[0])}")
        if expected_dim is not None and self.dim != expected_dim:
            raise EmbeddingFormatError(
                f"embedding dim {self.dim} != {expected_dim}"
            )


def write_embedding(
    record: EmbeddingRecord, path: str | Path, *, allow_any_dim: bool = False
) -> None:
    """Write one embedding record as an AVRE file.

    `allow_any_dim` skips only the dim==768 check; all other invariants
    (finite values, known enums) always apply.
    """
    record.validate(expected_dim=None if allow_any_dim else EMBEDDING_DIM)
    payload = np.ascontiguousarray(record.values, dtype="<f4").tobytes()
    header = struct.pack(
        "<4sIBBHIQ",
        MAGIC,
        VERSION,
        MODALITIES.index(record.modality),
        EXTRACTORS.index(record.extractor),
        0,
        record.dim,
        0,
    )
    assert len(header) == HEADER_SIZE
    Path(path).write_bytes(header + payload)


def read_embedding(path: str | Path, clip_id: str = "") -> EmbeddingRecord:
    """Read and validate an AVRE file."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_SIZE:
        raise EmbeddingFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, modality, extractor, _res0, dim, _res1 = struct.unpack(
        "<4sIBBHIQ", raw[:HEADER_SIZE]
    )
    if magic != MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise EmbeddingFormatError(f"{path}: unsupported version {version}")
    if modality >= len(MODALITIES):
        raise EmbeddingFormatError(f"{path}: unknown modality code {modality}")
    if extractor >= len(EXTRACTORS):
        raise EmbeddingFormatError(f"{path}: unknown extractor code {extractor}")
    expected = HEADER_SIZE + dim * 4
    if len(raw) < expected:
        raise EmbeddingFormatError(
            f"{path}: truncated payload (need {expected} bytes, have {len(raw)})"
        )
    values = np.frombuffer(raw[HEADER_SIZE:expected], dtype="<f4").copy()
    record = EmbeddingRecord(
        clip_id=clip_id,
        modality=MODALITIES[modality],
        extractor=EXTRACTORS[extractor],
        values=values,
    )
    record.validate(expected_dim=None)
    return record


@dataclass
class Clip:
    clip_id: str
    label: int  # 0 = non_humor, 1 = humor
    audio: EmbeddingRecord
    video: EmbeddingRecord


@dataclass
class Dataset:
    name: str
    clips: list[Clip]

    def __len__(self) -> int:
        return len(self.clips)

    def labels(self) -> np.ndarray:
        return np.array([c.label for c in self.clips], dtype=np.int64)

    def audio_matrix(self) -> np.ndarray:
        return np.stack([c.audio.values for c in self.clips])

    def video_matrix(self) -> np.ndarray:
        return np.stack([c.video.values for c in self.clips])

    def by_id(self, clip_id: str) -> Clip:
        for c in self.clips:
            if c.clip_id == clip_id:
                return c
        raise KeyError(clip_id)


def write_manifest(path: str | Path, name: str, clips: list[dict]) -> None:
    """Write a dataset manifest JSON; clip paths should be relative to `path`."""
    doc = {"name": name, "clips": clips}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True))


def load_dataset(manifest_path: str | Path, expected_dim: int = EMBEDDING_DIM) -> Dataset:
    """Load a manifest and all referenced embedding files into memory."""
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read manifest {manifest_path}: {exc}") from exc
    if not isinstance(doc, dict) or "clips" not in doc:
        raise DatasetError(f"{manifest_path}: manifest must have a 'clips' list")

    base = manifest_path.parent
    seen: set[str] = set()
    clips: list[Clip] = []
    for entry in doc["clips"]:
        clip_id = entry.get("clip_id")
        if not clip_id:
            raise DatasetError("clip entry missing clip_id")
        if clip_id in seen:
            raise DatasetError(f"duplicate clip_id {clip_id!r}")
        seen.add(clip_id)
        label = entry.get("label")
        if label not in (0, 1):
            raise DatasetError(f"clip {clip_id!r}: label {label!r} not in {{0, 1}}")
        records = {}
        for modality in MODALITIES:
            rel = entry.get(f"{modality}_path")
            if not rel:
                raise DatasetError(f"clip {clip_id!r}: missing {modality}_path")
            full = base / rel
            if not full.exists():
                raise DatasetError(f"clip {clip_id!r}: missing file {full}")
            rec = read_embedding(full, clip_id=clip_id)
            if rec.dim != expected_dim:
                raise DatasetError(
                    f"clip {clip_id!r} {modality}: dim {rec.dim} != {expected_dim}"
                )
            if rec.modality != modality:
                raise DatasetError(
                    f"clip {clip_id!r}: file {full} has modality "
                    f"{rec.modality!r}, expected {modality!r}"
                )
            records[modality] = rec
        clips.append(Clip(clip_id, int(label), records["audio"], records["video"]))

    labels = {c.label for c in clips}
    if labels != {0, 1}:
        raise DatasetError(
            "dataset must contain at least one clip of each label "
            f"(labels present: {sorted(labels)})"
        )
    return Dataset(name=str(doc.get("name", manifest_path.stem)), clips=clips)


@dataclass
class FoldPlan:
    k: int
    seed: int
    assignment: dict[str, int] = field(default_factory=dict)

    def fold_ids(self, fold: int) -> list[str]:
        return sorted(cid for cid, f in self.assignment.items() if f == fold)

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "assignment": dict(sorted(self.assignment.items()))}


def make_folds(dataset: Dataset, k: int, seed: int) -> FoldPlan:
    """Stratified k-way partition of clip ids, deterministic in (data, k, seed).

    Each class's clip list is sorted, shuffled with a class-keyed SplitMix64
    stream, then dealt round-robin. The second class continues dealing where
    the first left off so total fold sizes also differ by at most one.
    """
    if k < 2:
        raise DatasetError(f"k must be >= 2, got {k}")
    by_class: dict[int, list[str]] = {0: [], 1: []}
    for clip in dataset.clips:
        by_class[clip.label].append(clip.clip_id)
    for label, ids in by_class.items():
        if len(ids) < k:
            raise DatasetError(
                f"class {LABEL_NAMES[label]} has {len(ids)} < {k} members"
            )

    assignment: dict[str, int] = {}
    offset = 0
    for label in (0, 1):
        ids = sorted(by_class[label])
        rng = SplitMix64(seed ^ fnv1a64(LABEL_NAMES[label]))
        rng.shuffle(ids)
        for i, clip_id in enumerate(ids):
            assignment[clip_id] = (offset + i) % k
        offset = (offset + len(ids)) % k
    return FoldPlan(k=k, seed=seed, assignment=assignment)
