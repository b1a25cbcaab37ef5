"""Audio-visual humor detection: embedding I/O, from-scratch fusion models,
cross-validation training, and an HTTP inference service."""

from .embedding_io import (
    Dataset,
    DatasetError,
    EmbeddingFormatError,
    EmbeddingRecord,
    FoldPlan,
    load_dataset,
    make_folds,
    read_embedding,
    write_embedding,
)
from .nn import ModelSpec, init_params, load_model, model_forward, predict_proba, save_model
from .trainer import TrainConfig, cross_validate, train_fold

__all__ = [
    "Dataset",
    "DatasetError",
    "EmbeddingFormatError",
    "EmbeddingRecord",
    "FoldPlan",
    "ModelSpec",
    "TrainConfig",
    "cross_validate",
    "init_params",
    "load_dataset",
    "load_model",
    "make_folds",
    "model_forward",
    "predict_proba",
    "read_embedding",
    "save_model",
    "train_fold",
    "write_embedding",
]

__version__ = "0.1.0"
