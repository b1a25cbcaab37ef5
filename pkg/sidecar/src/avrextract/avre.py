"""Writer and reader for the AVRE embedding file format.

Layout (little-endian): magic "AVRE", u32 version, u8 modality,
u8 extractor, u16 reserved, u32 dim, u64 reserved, then dim float32
values. This is the wire contract with the classifier package; the
sidecar ships its own implementation so the file format stays the only
coupling between the two.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"AVRE"
VERSION = 1
HEADER = struct.Struct("<4sIBBHIQ")

MODALITIES = ("audio", "video")
EXTRACTORS = ("ast", "videomae", "languagebind_audio", "languagebind_video")


class AvreError(ValueError):
    pass


def write_avre(path: str | Path, modality: str, extractor: str,
               values: np.ndarray) -> None:
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 1 or values.size == 0:
        raise AvreError("values must be a non-empty 1-d vector")
    if not np.all(np.isfinite(values)):
        raise AvreError("non-finite embedding value")
    header = HEADER.pack(MAGIC, VERSION, MODALITIES.index(modality),
                         EXTRACTORS.index(extractor), 0, values.size, 0)
    Path(path).write_bytes(header + values.tobytes())


def read_avre(path: str | Path) -> tuple[str, str, np.ndarray]:
    """Read an AVRE file; returns (modality, extractor, values)."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise AvreError("truncated header")
    magic, version, mod, ext, _, dim, _ = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise AvreError("bad magic")
    if version != VERSION:
        raise AvreError(f"unsupported version {version}")
    if mod >= len(MODALITIES) or ext >= len(EXTRACTORS):
        raise AvreError("unknown enum value")
    values = np.frombuffer(raw, dtype="<f4", count=dim, offset=HEADER.size)
    if values.size != dim:
        raise AvreError("truncated payload")
    if not np.all(np.isfinite(values)):
        raise AvreError("non-finite embedding value")
    return MODALITIES[mod], EXTRACTORS[ext], values.copy()
