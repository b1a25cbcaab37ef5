"""Classification metrics: accuracy and macro-averaged F1 over two classes."""
from __future__ import annotations

import numpy as np


def _check(predictions, labels) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predictions, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    if p.shape != y.shape or p.ndim != 1:
        raise ValueError(f"length mismatch: {p.shape} vs {y.shape}")
    if p.size == 0:
        raise ValueError("empty input")
    return p, y


def accuracy(predictions, labels) -> float:
    p, y = _check(predictions, labels)
    return float((p == y).mean())


def confusion_matrix(predictions, labels, num_classes: int = 2) -> np.ndarray:
    """counts[true, predicted]."""
    p, y = _check(predictions, labels)
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (y, p), 1)
    return counts


def macro_f1(predictions, labels, num_classes: int = 2) -> float:
    """Unweighted mean of per-class F1; a class with P+R == 0 scores 0."""
    cm = confusion_matrix(predictions, labels, num_classes)
    f1s = []
    for c in range(num_classes):
        tp = cm[c, c]
        fp = cm[:, c].sum() - tp
        fn = cm[c, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1s.append(
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
    return float(np.mean(f1s))
