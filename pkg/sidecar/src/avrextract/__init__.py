"""Media-to-embedding extractor: wraps pretrained audio/video encoders
to turn clips into 768-d AVRE embedding files."""
from .audio import (
    ResampleEvent,
    add_resample_observer,
    load_wav,
    remove_resample_observer,
    resample_to,
)
from .avre import AvreError, read_avre, write_avre
from .encoders import EncoderSettings, build_encoders, canonical_pair
from .extract import (
    EMBEDDING_DIM,
    ExtractionRequest,
    MediaError,
    extract_clip,
    extract_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AvreError",
    "EMBEDDING_DIM",
    "EncoderSettings",
    "ExtractionRequest",
    "MediaError",
    "ResampleEvent",
    "add_resample_observer",
    "build_encoders",
    "canonical_pair",
    "extract_clip",
    "extract_dataset",
    "load_wav",
    "read_avre",
    "remove_resample_observer",
    "resample_to",
    "write_avre",
]
