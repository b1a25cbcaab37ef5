import numpy as np
import pytest

from avhumor.metrics import accuracy, confusion_matrix, macro_f1


def naive_metrics(preds, labels):
    """Independent oracle: count pairs directly, no vectorization."""
    n = len(preds)
    acc = sum(1 for p, y in zip(preds, labels) if p == y) / n
    f1s = []
    for c in (0, 1):
        tp = sum(1 for p, y in zip(preds, labels) if p == c and y == c)
        fp = sum(1 for p, y in zip(preds, labels) if p == c and y != c)
        fn = sum(1 for p, y in zip(preds, labels) if p != c and y == c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return acc, sum(f1s) / 2


def test_accuracy_examples():
    assert accuracy([0, 1, 1, 1], [0, 0, 1, 1]) == 0.75
    assert accuracy([1, 0, 1], [1, 0, 1]) == 1.0
    assert accuracy([1, 1, 1], [0, 0, 0]) == 0.0


def test_accuracy_errors():
    with pytest.raises(ValueError):
        accuracy([0, 1], [0])
    with pytest.raises(ValueError):
        accuracy([], [])


def test_macro_f1_hand_example():
    # class0: P=1, R=1/2 -> F1=2/3; class1: P=2/3, R=1 -> F1=4/5
    assert abs(macro_f1([0, 1, 1, 1], [0, 0, 1, 1]) - (2 / 3 + 4 / 5) / 2) < 1e-12


def test_macro_f1_perfect_and_degenerate():
    assert macro_f1([0, 1, 0, 1], [0, 1, 0, 1]) == 1.0
    # all predicted class 1 on balanced labels: class0 F1=0, class1 F1=2/3
    assert abs(macro_f1([1, 1, 1, 1], [0, 0, 1, 1]) - 1 / 3) < 1e-12


def test_confusion_matrix_layout():
    cm = confusion_matrix([0, 1, 1, 1], [0, 0, 1, 1])
    assert np.array_equal(cm, [[1, 1], [0, 2]])


def test_matches_naive_oracle_on_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        preds = rng.integers(0, 2, n)
        labels = rng.integers(0, 2, n)
        acc_o, f1_o = naive_metrics(list(preds), list(labels))
        assert abs(accuracy(preds, labels) - acc_o) < 1e-9
        assert abs(macro_f1(preds, labels) - f1_o) < 1e-9


def test_accuracy_equals_micro_recall_balanced_case():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(2, 20)) * 2
        labels = np.array([0, 1] * (n // 2))
        preds = rng.integers(0, 2, n)
        cm = confusion_matrix(preds, labels)
        micro_recall = np.trace(cm) / cm.sum()
        assert abs(accuracy(preds, labels) - micro_recall) < 1e-12
