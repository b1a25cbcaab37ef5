"""Cross-validation training harness and experiment reporting."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, asdict, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import nn
from .embedding_io import Clip, Dataset, FoldPlan, LABEL_NAMES, make_folds
from .metrics import accuracy, macro_f1
from .nn import ModelSpec, Params, init_params, model_backward, model_forward, softmax
from .optim import Adam, AdamHyper, EarlyStopState, cross_entropy_batch
from .rng import SplitMix64, derive_seed

# Scores reported for this architecture family in the original study
# (averages over 5 folds, on a dataset that is not publicly identified).
# Carried as report metadata only; they are not reproducible targets.
REFERENCE_SCORES = {
    "cnn": {"languagebind": 49.68, "videomae+ast": 56.70},
    "lstm": {"languagebind": 48.40, "videomae+ast": 54.82},
}


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss becomes non-finite."""


@dataclass
class TrainConfig:
    arch: str = "cnn"
    extractor_pair: str = "videomae+ast"  # "videomae+ast" | "languagebind"
    epochs: int = 50
    lr: float = 1e-5
    batch_size: int = 32
    k: int = 5
    seed: int = 0
    dropout_rate: float = 0.2
    patience: int = 5
    min_delta: float = 1e-4
    val_fraction: float = 0.1
    lstm_seq_len: int = 768
    pooling: str = "avg"

    def __post_init__(self):
        if self.epochs < 0 or self.lr <= 0 or self.batch_size < 1 or self.k < 2:
            raise ValueError("epochs/lr/batch_size/k out of range")
        if not 0.0 < self.val_fraction < 0.5:
            raise ValueError("val_fraction must be in (0, 0.5)")
        if self.extractor_pair not in ("videomae+ast", "languagebind"):
            raise ValueError(f"unknown extractor_pair {self.extractor_pair!r}")

    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            arch=self.arch,
            dropout_rate=self.dropout_rate,
            lstm_seq_len=self.lstm_seq_len,
            pooling=self.pooling,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FoldResult:
    fold_index: int
    test_accuracy: float
    test_macro_f1: float
    stop_epoch: int  # epochs actually run
    best_epoch: int  # epoch whose snapshot was restored
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    params: Params | None = None  # float32, excluded from report JSON

    def to_report_entry(self) -> dict:
        d = asdict(self)
        d.pop("params")
        return d


def _clip_arrays(clips: list[Clip]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    audio = np.stack([c.audio.values for c in clips]).astype(np.float64)
    video = np.stack([c.video.values for c in clips]).astype(np.float64)
    labels = np.array([c.label for c in clips], dtype=np.int64)
    return audio, video, labels


def _stratified_val_split(
    clips: list[Clip], val_fraction: float, seed: int
) -> tuple[list[Clip], list[Clip]]:
    """Hold out ~val_fraction of clips per class, at least one per class when
    the class can spare one."""
    val_ids: set[str] = set()
    for label in (0, 1):
        ids = sorted(c.clip_id for c in clips if c.label == label)
        n_val = min(len(ids) - 1, max(1, round(val_fraction * len(ids))))
        if n_val <= 0:
            continue
        rng = SplitMix64(derive_seed(seed, "valsplit", label))
        rng.shuffle(ids)
        val_ids.update(ids[:n_val])
    train = [c for c in clips if c.clip_id not in val_ids]
    val = [c for c in clips if c.clip_id in val_ids]
    return train, val


def _eval_loss(spec: ModelSpec, params: Params, audio, video, labels) -> float:
    logits, _ = model_forward(spec, params, audio, video, train=False)
    loss, _ = cross_entropy_batch(logits, labels)
    return loss


def evaluate_clips(spec: ModelSpec, params: Params, clips: list[Clip]) -> dict:
    """Eval-mode metrics and per-clip predictions on labeled clips."""
    audio, video, labels = _clip_arrays(clips)
    logits, _ = model_forward(spec, params, audio, video, train=False)
    probs = softmax(logits)
    preds = np.argmax(probs, axis=1)  # argmax ties break toward non_humor (index 0)
    return {
        "accuracy": accuracy(preds, labels),
        "macro_f1": macro_f1(preds, labels),
        "predictions": [
            {
                "clip_id": c.clip_id,
                "label": int(y),
                "predicted": int(p),
                "probabilities": {
                    "non_humor": float(pr[0]),
                    "humor": float(pr[1]),
                },
            }
            for c, y, p, pr in zip(clips, labels, preds, probs)
        ],
    }


def train_fold(
    dataset: Dataset, fold_plan: FoldPlan, test_fold: int, config: TrainConfig
) -> FoldResult:
    """Train on all folds except `test_fold` (minus an internal validation
    split used for early stopping) and evaluate on the held-out fold."""
    spec = config.model_spec()
    test_ids = set(fold_plan.fold_ids(test_fold))
    if not test_ids:
        raise ValueError(f"test fold {test_fold} is empty")
    pool = [c for c in dataset.clips if c.clip_id not in test_ids]
    if not pool:
        raise ValueError("empty training split")
    train_clips, val_clips = _stratified_val_split(
        pool, config.val_fraction, derive_seed(config.seed, "val", test_fold)
    )
    test_clips = [c for c in dataset.clips if c.clip_id in test_ids]

    xa, xv, y = _clip_arrays(train_clips)
    val_arrays = _clip_arrays(val_clips) if val_clips else None

    params64: Params = {
        k: v.astype(np.float64)
        for k, v in init_params(spec, derive_seed(config.seed, "init", test_fold)).items()
    }
    init_snapshot = {k: v.copy() for k, v in params64.items()}
    adam = Adam(AdamHyper(lr=config.lr))
    stopper = EarlyStopState(patience=config.patience, min_delta=config.min_delta)

    n = len(train_clips)
    train_losses: list[float] = []
    val_losses: list[float] = []
    epochs_run = 0
    for epoch in range(1, config.epochs + 1):
        order = list(range(n))
        SplitMix64(derive_seed(config.seed, "shuffle", test_fold, epoch)).shuffle(order)
        batch_losses = []
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            drop_rng = SplitMix64(
                derive_seed(config.seed, "dropout", test_fold, epoch, b)
            )
            logits, cache = model_forward(
                spec, params64, xa[idx], xv[idx], train=True, rng=drop_rng
            )
            loss, grad_logits = cross_entropy_batch(logits, y[idx])
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite training loss at fold {test_fold}, "
                    f"epoch {epoch}, batch {b}"
                )
            batch_losses.append(loss)
            grads = model_backward(spec, params64, cache, grad_logits)
            adam.step(params64, grads)
        epochs_run = epoch
        train_losses.append(float(np.mean(batch_losses)))
        if val_arrays is not None:
            val_loss = _eval_loss(spec, params64, *val_arrays)
        else:
            val_loss = train_losses[-1]  # degenerate tiny datasets only
        val_losses.append(val_loss)
        if stopper.update(epoch, val_loss, params64) == "stop":
            break

    final64 = stopper.restore(params64 if config.epochs > 0 else init_snapshot)
    final = {k: v.astype(np.float32) for k, v in final64.items()}
    test_eval = evaluate_clips(spec, final, test_clips)
    return FoldResult(
        fold_index=test_fold,
        test_accuracy=test_eval["accuracy"],
        test_macro_f1=test_eval["macro_f1"],
        stop_epoch=epochs_run,
        best_epoch=stopper.best_epoch,
        train_losses=train_losses,
        val_losses=val_losses,
        params=final,
    )


def cross_validate(
    dataset: Dataset, config: TrainConfig, out_dir: str | Path | None = None
) -> dict:
    """Run k-fold cross-validation and return the report document.

    If `out_dir` is given, writes report.json and one model file per fold
    there. Fold results are joined in fold-index order, so the report is
    deterministic for a fixed (dataset, config, seed).
    """
    t0 = time.perf_counter()
    fold_plan = make_folds(dataset, config.k, config.seed)
    results = [train_fold(dataset, fold_plan, f, config) for f in range(config.k)]
    spec = config.model_spec()
    report = {
        "config": config.to_dict(),
        "config_hash": nn.config_hash(spec, config.seed),
        "dataset": {
            "name": dataset.name,
            "num_clips": len(dataset),
            "class_counts": {
                LABEL_NAMES[label]: int((dataset.labels() == label).sum())
                for label in (0, 1)
            },
        },
        "fold_plan": fold_plan.to_dict(),
        "folds": [r.to_report_entry() for r in results],
        "mean_accuracy": float(np.mean([r.test_accuracy for r in results])),
        "mean_macro_f1": float(np.mean([r.test_macro_f1 for r in results])),
        "reference_scores": REFERENCE_SCORES,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": time.perf_counter() - t0,
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for r in results:
            nn.save_model(
                out_dir / f"fold{r.fold_index}.model.json",
                spec,
                r.params,
                config.seed,
                metrics={
                    "test_accuracy": r.test_accuracy,
                    "test_macro_f1": r.test_macro_f1,
                },
            )
        (out_dir / "report.json").write_text(
            json.dumps(report, indent=1, sort_keys=True)
        )
    report["_fold_results"] = results  # in-memory only; not serialized
    return report


def default_run_dir(config: TrainConfig, root: str | Path = "runs") -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return Path(root) / f"{stamp}-{nn.config_hash(config.model_spec(), config.seed)}"


def format_report_table(report: dict) -> str:
    """Human-readable summary table of the cross-validation scores."""
    lines = [
        f"Dataset: {report['dataset']['name']}  "
        f"({report['dataset']['num_clips']} clips)",
        f"Arch: {report['config']['arch']}   "
        f"Embeddings: {report['config']['extractor_pair']}",
        "",
        f"{'Fold':<6}{'Accuracy':>10}{'Macro-F1':>10}{'Stop epoch':>12}",
    ]
    for fold in report["folds"]:
        lines.append(
            f"{fold['fold_index']:<6}{fold['test_accuracy']:>10.4f}"
            f"{fold['test_macro_f1']:>10.4f}{fold['stop_epoch']:>12}"
        )
    lines.append(
        f"{'mean':<6}{report['mean_accuracy']:>10.4f}"
        f"{report['mean_macro_f1']:>10.4f}"
    )
    lines.append("")
    lines.append("Reference scores (original study, unavailable dataset):")
    for arch, scores in report["reference_scores"].items():
        for pair, score in scores.items():
            lines.append(f"  {arch:<5} {pair:<14} {score:6.2f}")
    return "\n".join(lines)


def save_model(path, spec: ModelSpec, params: Params, seed: int, metrics=None):
    nn.save_model(path, spec, params, seed, metrics=metrics)


def load_model(path, expect_config_hash: str | None = None):
    return nn.load_model(path, expect_config_hash=expect_config_hash)
