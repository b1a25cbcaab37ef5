"""HTTP inference service: mp4 upload -> humor / non-humor probabilities.

Pipeline per request: demux the upload into a 16 kHz mono audio track
(external media tool, configurable command), hand both streams to the
extractor sidecar (subprocess or HTTP) which writes one AVRE embedding per
modality, then run the trained fusion model in eval mode.

The media tool and extractor are opaque commands configured with
placeholder templates, so tests can stub them and deployments can point at
ffmpeg plus a real sidecar.
"""
from __future__ import annotations

import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .embedding_io import EMBEDDING_DIM, EmbeddingFormatError, read_embedding
from .nn import load_model, predict_proba
from .trainer import REFERENCE_SCORES

DEFAULT_DEMUX_COMMAND = (
    "ffmpeg -y -loglevel error -i {input} -vn -ac 1 -ar 16000 {audio_out}"
)
DEFAULT_EXTRACTOR_COMMAND = (
    "avr-extract extract --pair {pair} --audio {audio_in} --in {video_in} "
    "--audio-out {audio_out} --video-out {video_out}"
)


@dataclass
class ServiceConfig:
    model_path: str | Path = "model.json"
    host: str = "127.0.0.1"
    port: int = 8000
    extractor_pair: str = "videomae+ast"
    demux_command: str = DEFAULT_DEMUX_COMMAND
    extractor_command: str = DEFAULT_EXTRACTOR_COMMAND
    max_upload_bytes: int = 200 * 1024 * 1024
    # Extraction can be slow on CPU; keep the bound generous.
    extractor_timeout_s: float = 60.0
    extractor_concurrency: int = 1
    cors_origins: list[str] = field(default_factory=lambda: ["*"])


class ServiceError(Exception):
    def __init__(self, status: int, error_code: str, message: str, detail: str = ""):
        super().__init__(message)
        self.status = status
        self.error_code = error_code
        self.message = message
        self.detail = detail

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={
                "error_code": self.error_code,
                "message": self.message,
                "detail": self.detail,
            },
        )


class EmbeddingPayload(BaseModel):
    audio: list[float]
    video: list[float]


def _run_command(template: str, timeout: float, **values: str) -> subprocess.CompletedProcess:
    argv = [tok.format(**values) for tok in shlex.split(template)]
    return subprocess.run(argv, capture_output=True, text=True, timeout=timeout)


def _check_vector(name: str, vec: list[float]) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != EMBEDDING_DIM:
        raise ServiceError(
            400, "invalid_embedding",
            f"field '{name}' must have length {EMBEDDING_DIM}, got {arr.shape[0] if arr.ndim == 1 else arr.shape}",
        )
    if not np.all(np.isfinite(arr)):
        raise ServiceError(400, "invalid_embedding", f"field '{name}' contains non-finite values")
    return arr


class PredictionEngine:
    """Owns the loaded model and the demux/extract orchestration."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.spec, self.params, self.seed, doc = load_model(config.model_path)
        self.model_id = f"{self.spec.arch}-{doc['config_hash']}"
        self.started_at = time.time()
        self._extract_slot = threading.Semaphore(config.extractor_concurrency)

    def predict_from_embeddings(
        self, audio: np.ndarray, video: np.ndarray, demux_ms: int = 0, extract_ms: int = 0
    ) -> dict:
        t0 = time.perf_counter()
        probs = predict_proba(self.spec, self.params, audio, video)
        model_ms = int((time.perf_counter() - t0) * 1000)
        p0, p1 = float(probs[0]), float(probs[1])
        return {
            "probabilities": {"non_humor": p0, "humor": p1},
            # ties break toward non_humor
            "predicted_label": "humor" if p1 > p0 else "non_humor",
            "latency_ms": demux_ms + extract_ms + model_ms,
            "demux_ms": demux_ms,
            "extract_ms": extract_ms,
            "model_ms": model_ms,
            "model_id": self.model_id,
        }

    def predict_from_video(self, payload: bytes) -> dict:
        if len(payload) == 0:
            raise ServiceError(400, "undecodable_media", "undecodable media: empty upload")
        if len(payload) > self.config.max_upload_bytes:
            raise ServiceError(
                413, "payload_too_large",
                f"upload of {len(payload)} bytes exceeds limit {self.config.max_upload_bytes}",
            )
        with tempfile.TemporaryDirectory(prefix="avr-") as tmp:
            tmp_path = Path(tmp)
            video_path = tmp_path / "input.mp4"
            video_path.write_bytes(payload)
            audio_wav = tmp_path / "audio.wav"

            t0 = time.perf_counter()
            try:
                demux = _run_command(
                    self.config.demux_command,
                    self.config.extractor_timeout_s,
                    input=str(video_path),
                    audio_out=str(audio_wav),
                )
            except (subprocess.TimeoutExpired, OSError) as exc:
                raise ServiceError(502, "demux_failed", f"media tool failed: {exc}")
            demux_ms = int((time.perf_counter() - t0) * 1000)
            if demux.returncode != 0:
                raise ServiceError(
                    400, "undecodable_media", "undecodable media",
                    detail=demux.stderr.strip()[-500:],
                )
            if not audio_wav.exists() or audio_wav.stat().st_size == 0:
                raise ServiceError(
                    400, "missing_audio_track",
                    "input video has no usable audio track",
                )

            audio_avre = tmp_path / "audio.avre"
            video_avre = tmp_path / "video.avre"
            t1 = time.perf_counter()
            with self._extract_slot:
                try:
                    extract = _run_command(
                        self.config.extractor_command,
                        self.config.extractor_timeout_s,
                        pair=self.config.extractor_pair,
                        audio_in=str(audio_wav),
                        video_in=str(video_path),
                        audio_out=str(audio_avre),
                        video_out=str(video_avre),
                    )
                except subprocess.TimeoutExpired:
                    raise ServiceError(502, "extractor_failed", "extractor timed out")
                except OSError as exc:
                    raise ServiceError(502, "extractor_failed", f"cannot run extractor: {exc}")
            if extract.returncode != 0:
                raise ServiceError(
                    502, "extractor_failed", "extractor exited nonzero",
                    detail=extract.stderr.strip()[-500:],
                )
            extract_ms = int((time.perf_counter() - t1) * 1000)

            embeddings = {}
            for name, path in (("audio", audio_avre), ("video", video_avre)):
                try:
                    rec = read_embedding(path)
                except (OSError, EmbeddingFormatError) as exc:
                    raise ServiceError(
                        502, "extractor_failed", f"bad {name} embedding output: {exc}"
                    )
                if rec.dim != EMBEDDING_DIM:
                    raise ServiceError(
                        502, "embedding_dim_mismatch",
                        f"embedding dim {rec.dim} != {EMBEDDING_DIM}",
                    )
                embeddings[name] = rec.values.astype(np.float64)
        return self.predict_from_embeddings(
            embeddings["audio"], embeddings["video"], demux_ms, extract_ms
        )


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the FastAPI app; the model must load or this raises."""
    engine = PredictionEngine(config)
    app = FastAPI(title="audio-visual humor detector")
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware,
        allow_origins=config.cors_origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return exc.response()

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "model_id": engine.model_id,
            "uptime_s": round(time.time() - engine.started_at, 3),
        }

    @app.get("/v1/model")
    def model_info():
        return {
            "model_id": engine.model_id,
            "arch": engine.spec.arch,
            "extractor_pair": config.extractor_pair,
            "spec": engine.spec.to_dict(),
            "seed": engine.seed,
            "reference_scores": REFERENCE_SCORES,
        }

    @app.post("/v1/predict")
    def predict(video: UploadFile):
        payload = video.file.read()
        return engine.predict_from_video(payload)

    @app.post("/v1/predict_embedding")
    def predict_embedding(payload: EmbeddingPayload):
        audio = _check_vector("audio", payload.audio)
        video = _check_vector("video", payload.video)
        return engine.predict_from_embeddings(audio, video)

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until terminated."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
