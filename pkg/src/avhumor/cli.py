"""Operator command line: train, evaluate, predict, serve, folds.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
Machine-readable results go to stdout as JSON; logs go to stderr.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import service as service_mod
from .embedding_io import (
    DatasetError,
    EmbeddingFormatError,
    load_dataset,
    make_folds,
    read_embedding,
)
from .nn import ModelFormatError, load_model
from .service import PredictionEngine, ServiceConfig
from .trainer import (
    TrainConfig,
    TrainingDivergedError,
    cross_validate,
    default_run_dir,
    evaluate_clips,
    format_report_table,
)

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


def _echo_config(label: str, config: dict) -> None:
    click.echo(f"{label}: {json.dumps(config, sort_keys=True)}", err=True)


@click.group()
def cli():
    """Audio-visual humor detection toolkit."""


# Defaults marked (published) follow the original training protocol;
# the rest are this project's documented choices.
def train_options(f):
    opts = [
        click.option("--arch", type=click.Choice(["cnn", "lstm"]), default="cnn",
                     show_default=True, help="Downstream architecture."),
        click.option("--extractor-pair", type=click.Choice(["videomae+ast", "languagebind"]),
                     default="videomae+ast", show_default=True,
                     help="Embedding source recorded in the report."),
        click.option("--epochs", type=int, default=50, show_default=True,
                     help="Training epochs (published default)."),
        click.option("--lr", type=float, default=1e-5, show_default=True,
                     help="Adam learning rate (published default)."),
        click.option("--batch-size", type=int, default=32, show_default=True,
                     help="Minibatch size (project default)."),
        click.option("--k", type=int, default=5, show_default=True,
                     help="Number of folds (published default)."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--dropout-rate", type=float, default=0.2, show_default=True,
                     help="Dropout after the hidden head layer (project default)."),
        click.option("--patience", type=int, default=5, show_default=True,
                     help="Early-stopping patience (project default)."),
        click.option("--min-delta", type=float, default=1e-4, show_default=True),
        click.option("--val-fraction", type=float, default=0.1, show_default=True,
                     help="Held-out fraction of each fold's training clips."),
        click.option("--lstm-seq-len", type=int, default=768, show_default=True,
                     help="LSTM sequence length; must divide 768."),
        click.option("--pooling", type=click.Choice(["avg", "flatten"]), default="avg",
                     show_default=True, help="CNN branch aggregation."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@train_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Run directory; defaults to runs/<timestamp>-<confighash>/.")
def train(manifest, out_dir, **kwargs):
    """Run k-fold cross-validation training on a labeled manifest."""
    config = TrainConfig(**kwargs)
    _echo_config("resolved config", config.to_dict())
    dataset = load_dataset(manifest)
    run_dir = Path(out_dir) if out_dir else default_run_dir(config)
    report = cross_validate(dataset, config, out_dir=run_dir)
    click.echo(format_report_table(report), err=True)
    report.pop("_fold_results", None)
    click.echo(json.dumps({"report_path": str(run_dir / "report.json"),
                           "mean_accuracy": report["mean_accuracy"],
                           "mean_macro_f1": report["mean_macro_f1"]}, sort_keys=True))


@cli.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
def evaluate(model_path, manifest):
    """Eval-mode metrics for a saved model on a labeled manifest."""
    spec, params, seed, _doc = load_model(model_path)
    _echo_config("resolved config", {"model": model_path, "manifest": manifest})
    dataset = load_dataset(manifest)
    result = evaluate_clips(spec, params, dataset.clips)
    click.echo(json.dumps({"accuracy": result["accuracy"],
                           "macro_f1": result["macro_f1"],
                           "predictions": result["predictions"]}, sort_keys=True))


@cli.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--audio", "audio_path", type=click.Path(exists=True, dir_okay=False),
              help="AVRE audio embedding file.")
@click.option("--video-emb", "video_emb_path", type=click.Path(exists=True, dir_okay=False),
              help="AVRE video embedding file.")
@click.option("--video", "video_path", type=click.Path(exists=True, dir_okay=False),
              help="mp4 file; demux + extraction run via the configured commands.")
@click.option("--demux-cmd", default=service_mod.DEFAULT_DEMUX_COMMAND, show_default=False)
@click.option("--extractor-cmd", default=service_mod.DEFAULT_EXTRACTOR_COMMAND,
              show_default=False)
@click.option("--extractor-pair", default="videomae+ast", show_default=True)
def predict(model_path, audio_path, video_emb_path, video_path,
            demux_cmd, extractor_cmd, extractor_pair):
    """Single prediction from embedding files or an mp4; prints JSON."""
    if video_path is None and not (audio_path and video_emb_path):
        raise click.UsageError("provide --audio and --video-emb, or --video")
    engine = PredictionEngine(ServiceConfig(
        model_path=model_path,
        demux_command=demux_cmd,
        extractor_command=extractor_cmd,
        extractor_pair=extractor_pair,
    ))
    _echo_config("resolved config", {"model": model_path, "pair": extractor_pair})
    if video_path is not None:
        result = engine.predict_from_video(Path(video_path).read_bytes())
    else:
        audio = read_embedding(audio_path).values.astype(np.float64)
        video = read_embedding(video_emb_path).values.astype(np.float64)
        result = engine.predict_from_embeddings(audio, video)
    click.echo(json.dumps(result, sort_keys=True))


@cli.command()
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--demux-cmd", default=service_mod.DEFAULT_DEMUX_COMMAND)
@click.option("--extractor-cmd", default=service_mod.DEFAULT_EXTRACTOR_COMMAND)
@click.option("--extractor-pair", default="videomae+ast", show_default=True)
@click.option("--max-upload-bytes", type=int, default=200 * 1024 * 1024, show_default=True)
@click.option("--extractor-timeout-s", type=float, default=60.0, show_default=True)
def serve(model_path, host, port, demux_cmd, extractor_cmd, extractor_pair,
          max_upload_bytes, extractor_timeout_s):
    """Run the HTTP inference service until terminated."""
    config = ServiceConfig(
        model_path=model_path, host=host, port=port,
        demux_command=demux_cmd, extractor_command=extractor_cmd,
        extractor_pair=extractor_pair, max_upload_bytes=max_upload_bytes,
        extractor_timeout_s=extractor_timeout_s,
    )
    _echo_config("resolved config", {
        "model": model_path, "host": host, "port": port, "pair": extractor_pair,
    })
    service_mod.serve(config)


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def folds(manifest, k, seed):
    """Print the deterministic stratified fold plan as JSON."""
    _echo_config("resolved config", {"manifest": manifest, "k": k, "seed": seed})
    dataset = load_dataset(manifest)
    plan = make_folds(dataset, k, seed)
    click.echo(json.dumps(plan.to_dict(), sort_keys=True))


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except (DatasetError, EmbeddingFormatError, ModelFormatError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except click.exceptions.Exit as exc:  # --help
        return int(exc.exit_code)
    except click.Abort:
        return EXIT_RUNTIME
    except (TrainingDivergedError, Exception) as exc:  # noqa: BLE001
        click.echo(f"runtime error: {exc}", err=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
