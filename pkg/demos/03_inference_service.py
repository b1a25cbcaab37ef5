#!/usr/bin/env python3
"""
Serving predictions over HTTP
=============================

Trains a tiny model, then exercises the inference service in-process
with FastAPI's test client. The demux and extractor steps are stubbed
with small Python scripts so the demo is self-contained; a deployment
would point them at ffmpeg and the real extractor sidecar instead.

Run from the repository root:

    python3 demos/03_inference_service.py
"""
import json
import sys
import tempfile
import textwrap
from pathlib import Path

from fastapi.testclient import TestClient

from avhumor.embedding_io import load_dataset
from avhumor.service import ServiceConfig, create_app
from avhumor.synthetic import make_synthetic_dataset
from avhumor.trainer import TrainConfig, cross_validate

workdir = Path(tempfile.mkdtemp(prefix="demo03-"))

# Train something small to serve.
manifest = make_synthetic_dataset(workdir / "data", n_clips=30, seed=0,
                                  separation=0.5)
cross_validate(load_dataset(manifest),
               TrainConfig(arch="cnn", epochs=3, lr=1e-3, k=3, seed=0),
               out_dir=workdir / "run")
model_path = workdir / "run" / "fold0.model.json"

# Stand-in for ffmpeg: "demuxes" any upload by writing a fixed wav.
demux = workdir / "demux.py"
demux.write_text(textwrap.dedent("""\
    import sys
    open(sys.argv[2], "wb").write(b"RIFFfake-audio")
"""))

# Stand-in for the extractor sidecar: writes two fixed 768-d AVRE files.
extract = workdir / "extract.py"
extract.write_text(textwrap.dedent("""\
    import sys
    import numpy as np
    from avhumor.embedding_io import EmbeddingRecord, write_embedding
    rng = np.random.default_rng(42)
    for path, modality, extractor in [(sys.argv[3], "audio", "ast"),
                                      (sys.argv[4], "video", "videomae")]:
        vec = rng.standard_normal(768).astype(np.float32)
        write_embedding(EmbeddingRecord("demo", modality, extractor, vec), path)
"""))

config = ServiceConfig(
    model_path=model_path,
    demux_command=f"{sys.executable} {demux} {{input}} {{audio_out}}",
    extractor_command=(f"{sys.executable} {extract} {{pair}} {{audio_in}} "
                       f"{{audio_out}} {{video_out}} {{video_in}}"),
)
client = TestClient(create_app(config))

print("GET /v1/health")
print(json.dumps(client.get("/v1/health").json(), indent=2))

print("\nGET /v1/model (trimmed)")
info = client.get("/v1/model").json()
print(json.dumps({k: info[k] for k in ("model_id", "arch", "extractor_pair")},
                 indent=2))

print("\nPOST /v1/predict with a fake mp4 upload")
resp = client.post("/v1/predict",
                   files={"video": ("clip.mp4", b"fake-mp4-bytes", "video/mp4")})
print(json.dumps(resp.json(), indent=2))

print("\nPOST /v1/predict_embedding with raw vectors")
resp = client.post("/v1/predict_embedding",
                   json={"audio": [0.1] * 768, "video": [-0.1] * 768})
print(json.dumps(resp.json(), indent=2))

print("\nerror handling: wrong-length embedding")
resp = client.post("/v1/predict_embedding",
                   json={"audio": [0.1] * 10, "video": [0.1] * 768})
print(resp.status_code, json.dumps(resp.json()))
