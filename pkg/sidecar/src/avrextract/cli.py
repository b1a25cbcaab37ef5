"""Command line entry points.

Exit codes: 0 success, 1 usage error, 2 data error (undecodable media,
bad manifest), 3 runtime failure (model load, unexpected).
"""
from __future__ import annotations

import json
import sys

import click

from .audio import AudioError
from .encoders import EncoderSettings, ModelLoadError
from .extract import ExtractionRequest, MediaError, extract_clip, extract_dataset
from .video import VideoError


def _settings(**kwargs) -> EncoderSettings:
    return EncoderSettings(
        audio_checkpoint=kwargs.pop("audio_checkpoint"),
        video_checkpoint=kwargs.pop("video_checkpoint"),
        num_hidden_layers=kwargs.pop("layers"),
        image_size=kwargs.pop("image_size"),
        audio_frames=kwargs.pop("audio_frames"),
        device=kwargs.pop("device"),
    )


def settings_options(fn):
    for opt in reversed([
        click.option("--audio-checkpoint", default=None,
                     help="Local pretrained weights for the audio encoder."),
        click.option("--video-checkpoint", default=None,
                     help="Local pretrained weights for the video encoder."),
        click.option("--layers", type=int, default=None,
                     help="Override encoder depth (config-built models only)."),
        click.option("--image-size", type=int, default=None,
                     help="Override encoder input resolution."),
        click.option("--audio-frames", type=int, default=None,
                     help="Override spectrogram frame count."),
        click.option("--device", default="cpu", show_default=True),
    ]):
        fn = opt(fn)
    return fn


@click.group()
def cli():
    """Turn media clips into 768-d audio/video embedding files."""


@cli.command()
@click.option("--pair", default="videomae-ast", show_default=True,
              help="Extractor pair: videomae-ast or languagebind.")
@click.option("--in", "video_in", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Input video (mp4).")
@click.option("--audio", "audio_in", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Demuxed wav track; defaults to <video stem>.wav "
                   "next to the video.")
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False),
              help="Output directory for the two AVRE files.")
@click.option("--audio-out", default=None, help="Explicit audio AVRE path.")
@click.option("--video-out", default=None, help="Explicit video AVRE path.")
@settings_options
def extract(pair, video_in, audio_in, out_dir, audio_out, video_out, **kwargs):
    """Extract one clip into audio and video embedding files."""
    from pathlib import Path

    if audio_in is None:
        candidate = Path(video_in).with_suffix(".wav")
        if not candidate.exists():
            raise click.UsageError(
                f"no --audio given and {candidate} does not exist; "
                "demux the audio track to wav first")
        audio_in = str(candidate)
    request = ExtractionRequest(
        video_path=video_in, audio_path=audio_in, pair=pair,
        audio_out=audio_out, video_out=video_out, out_dir=out_dir,
        settings=_settings(**kwargs))
    fragment = extract_clip(request)
    click.echo(json.dumps(fragment, indent=2, sort_keys=True))


@cli.command("extract-dataset")
@click.option("--pair", default="videomae-ast", show_default=True)
@click.option("--manifest", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Raw-clip manifest: {clips: [{clip_id, label, video, audio}]}.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@settings_options
def extract_dataset_cmd(pair, manifest, out_dir, **kwargs):
    """Extract every clip in a manifest; resumable, per-clip errors collected."""
    report = extract_dataset(manifest, out_dir, pair=pair,
                             settings=_settings(**kwargs))
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    if report["errors"]:
        print(f"{len(report['errors'])} clip(s) failed", file=sys.stderr)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except (MediaError, AudioError, VideoError, ValueError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        print(f"unexpected error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
