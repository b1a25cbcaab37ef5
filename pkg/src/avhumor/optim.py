"""Cross-entropy loss, Adam, and early stopping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nn import Params


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def cross_entropy(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Loss and gradient w.r.t. logits for one sample.

    Uses the log-sum-exp form; grad = softmax(logits) - onehot(label).
    """
    logits = np.asarray(logits, dtype=np.float64)
    if label not in range(logits.shape[-1]):
        raise ValueError(f"label {label} out of range")
    logp = log_softmax(logits)
    grad = np.exp(logp)
    grad[label] -= 1.0
    return float(-logp[label]), grad


def cross_entropy_batch(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean loss over a batch and gradient w.r.t. logits (already /N)."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    n = logits.shape[0]
    if labels.shape != (n,):
        raise ValueError("labels shape mismatch")
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise ValueError("label out of range")
    logp = log_softmax(logits)
    loss = float(-logp[np.arange(n), labels].mean())
    grad = np.exp(logp)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


@dataclass
class AdamHyper:
    lr: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


class Adam:
    """Adam with bias correction; moments are float64 and mirror parameter
    shapes. One `step` call increments the step count by exactly 1."""

    def __init__(self, hyper: AdamHyper | None = None):
        self.hyper = hyper or AdamHyper()
        self.m: Params = {}
        self.v: Params = {}
        self.step_count = 0

    def step(self, params: Params, grads: Params) -> None:
        """Update params in place."""
        if set(grads) - set(params):
            raise ValueError("gradient for unknown parameter")
        h = self.hyper
        self.step_count += 1
        t = self.step_count
        for name, g in grads.items():
            p = params[name]
            if g.shape != p.shape:
                raise ValueError(
                    f"shape mismatch for {name}: param {p.shape}, grad {g.shape}"
                )
            if name not in self.m:
                self.m[name] = np.zeros(p.shape)
                self.v[name] = np.zeros(p.shape)
            self.m[name] = h.beta1 * self.m[name] + (1 - h.beta1) * g
            self.v[name] = h.beta2 * self.v[name] + (1 - h.beta2) * g * g
            m_hat = self.m[name] / (1 - h.beta1**t)
            v_hat = self.v[name] / (1 - h.beta2**t)
            params[name] = p - h.lr * m_hat / (np.sqrt(v_hat) + h.epsilon)


@dataclass
class EarlyStopState:
    patience: int = 5
    min_delta: float = 1e-4
    best_val_loss: float = math.inf
    best_params: Params | None = None
    best_epoch: int = 0
    epochs_since_improvement: int = 0
    failed: bool = False  # set on NaN validation loss

    def update(self, epoch: int, val_loss: float, params: Params) -> str:
        """Feed one epoch's validation loss; returns "continue" or "stop".

        Improvement means val_loss < best - min_delta; on improvement the
        parameters are snapshotted. Stops once the non-improvement streak
        exceeds the patience, or immediately on NaN.
        """
        if math.isnan(val_loss):
            self.failed = True
            return "stop"
        if val_loss < self.best_val_loss - self.min_delta or self.best_params is None:
            self.best_val_loss = val_loss
            self.best_params = {k: v.copy() for k, v in params.items()}
            self.best_epoch = epoch
            self.epochs_since_improvement = 0
            return "continue"
        self.epochs_since_improvement += 1
        return "stop" if self.epochs_since_improvement > self.patience else "continue"

    def restore(self, fallback: Params) -> Params:
        """Best snapshot seen, or the fallback if no epoch completed."""
        return self.best_params if self.best_params is not None else fallback
