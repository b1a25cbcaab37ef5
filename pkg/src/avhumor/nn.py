"""From-scratch layers and the two fusion architectures (CNN, LSTM).

All forward/backward math runs in float64; learned parameters are stored as
float32 (see `save_model`). Gradients are hand-derived and validated against
central finite differences in the test suite. Layer functions are batched
with a leading sample axis; single-sample convenience wrappers match the
shapes used in the docs.
"""
from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .rng import SplitMix64, derive_seed

FORMAT_VERSION = 1

Params = dict[str, np.ndarray]


class ModelFormatError(ValueError):
    """Raised for malformed model files."""


# ---------------------------------------------------------------------------
# Model specification
# ---------------------------------------------------------------------------

@dataclass
class ModelSpec:
    """Architecture description.

    Defaults follow the published configuration: two 1-D conv layers with 32
    and 64 filters of width 3, an LSTM with 50 hidden units, and a
    128-neuron classification head over the concatenated branch outputs.
    Activation choices, pooling, and dropout rate are this project's
    defaults and are configurable.
    """

    arch: str = "cnn"  # "cnn" | "lstm"
    input_dim: int = 768
    conv_filters: tuple[int, int] = (32, 64)
    kernel_size: int = 3
    lstm_hidden: int = 50
    head_hidden: int = 128
    num_classes: int = 2
    dropout_rate: float = 0.2
    # LSTM branch reads the embedding as (lstm_seq_len, input_dim/lstm_seq_len).
    # Default 768 gives the length-768, feature-size-1 reading.
    lstm_seq_len: int = 768
    pooling: str = "avg"  # "avg" | "flatten" (alternative branch aggregation)

    def __post_init__(self):
        self.conv_filters = tuple(self.conv_filters)
        if self.arch not in ("cnn", "lstm"):
            raise ValueError(f"unknown arch {self.arch!r}")
        if self.num_classes != 2:
            raise ValueError("num_classes must be 2")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.pooling not in ("avg", "flatten"):
            raise ValueError(f"unknown pooling {self.pooling!r}")
        if self.arch == "lstm" and self.input_dim % self.lstm_seq_len != 0:
            raise ValueError(
                f"lstm_seq_len {self.lstm_seq_len} must divide input_dim {self.input_dim}"
            )

    @property
    def lstm_feature_dim(self) -> int:
        return self.input_dim // self.lstm_seq_len

    def conv_out_len(self) -> int:
        length = self.input_dim
        for _ in self.conv_filters:
            length = length - self.kernel_size + 1
        return length

    def branch_dim(self) -> int:
        """Output width of one modality branch before fusion."""
        if self.arch == "cnn":
            if self.pooling == "avg":
                return self.conv_filters[-1]
            return self.conv_filters[-1] * self.conv_out_len()
        return self.lstm_hidden

    def fused_dim(self) -> int:
        return 2 * self.branch_dim()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conv_filters"] = list(self.conv_filters)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(**{k: v for k, v in d.items()})


# ---------------------------------------------------------------------------
# Layer primitives (batched, float64 internally)
# ---------------------------------------------------------------------------

def conv1d_batch_forward(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Valid 1-D convolution (cross-correlation), stride 1.

    x: (N, C_in, L); kernels: (C_out, C_in, K); bias: (C_out,)
    returns (N, C_out, L-K+1).
    """
    n, c_in, length = x.shape
    c_out, c_in_k, k = kernels.shape
    if c_in != c_in_k:
        raise ValueError(f"channel mismatch: input {c_in}, kernels {c_in_k}")
    if length < k:
        raise ValueError(f"input length {length} < kernel size {k}")
    t = length - k + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=2)  # (N,C,T,K)
    # im2col + one BLAS matmul
    cols = np.ascontiguousarray(windows.transpose(0, 2, 1, 3)).reshape(n * t, c_in * k)
    out = cols @ kernels.reshape(c_out, c_in * k).T + bias
    return np.ascontiguousarray(out.reshape(n, t, c_out).transpose(0, 2, 1))


def conv1d_batch_backward(
    x: np.ndarray, kernels: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv1d_batch_forward w.r.t. input, kernels, bias."""
    c_out, c_in, k = kernels.shape
    n, _, length = x.shape
    t = length - k + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=2)
    cols = np.ascontiguousarray(windows.transpose(0, 2, 1, 3)).reshape(n * t, c_in * k)
    gy = np.ascontiguousarray(grad_out.transpose(0, 2, 1)).reshape(n * t, c_out)
    grad_kernels = (gy.T @ cols).reshape(c_out, c_in, k)
    grad_bias = grad_out.sum(axis=(0, 2))
    # scatter the per-window gradients back onto input positions
    dcols = (gy @ kernels.reshape(c_out, c_in * k)).reshape(n, t, c_in, k)
    grad_x = np.zeros_like(x, dtype=np.float64)
    for j in range(k):
        grad_x[:, :, j:j + t] += dcols[:, :, :, j].transpose(0, 2, 1)
    return grad_x, grad_kernels, grad_bias


def conv1d_forward(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Single-sample convolution: x (C_in, L) -> (C_out, L-K+1)."""
    return conv1d_batch_forward(x[None], kernels, bias)[0]


def conv1d_backward(x, kernels, grad_out):
    gx, gk, gb = conv1d_batch_backward(x[None], kernels, grad_out[None])
    return gx[0], gk, gb


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x: (N, D) @ w: (D, M) + b."""
    return x @ w + b


def dense_backward(x, w, grad_out):
    return grad_out @ w.T, x.T @ grad_out, grad_out.sum(axis=0)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    return grad_out * (x > 0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction for stability."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """Mean over the last (length) axis: (..., C, L) -> (..., C)."""
    return x.mean(axis=-1)


def dropout(
    x: np.ndarray, rate: float, train: bool, rng: SplitMix64 | None = None
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout. Eval mode is the identity; returns (output, mask)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate {rate} outside [0, 1)")
    if not train or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError("train-mode dropout requires an rng")
    keep = 1.0 - rate
    mask = (rng.floats(x.size).reshape(x.shape) >= rate) / keep
    return x * mask, mask


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def lstm_forward(
    x: np.ndarray,
    wx: np.ndarray,
    wh: np.ndarray,
    b: np.ndarray,
    h0: np.ndarray | None = None,
    c0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict]:
    """Single-layer LSTM over a batch of sequences.

    x: (N, L, D); wx: (D, 4H); wh: (H, 4H); b: (4H,). Gate layout along the
    4H axis is [input, forget, cell, output]. Returns (h_seq (N,L,H),
    h_last, c_last, cache-for-backward).
    """
    n, length, d = x.shape
    hidden = wh.shape[0]
    if wx.shape != (d, 4 * hidden) or b.shape != (4 * hidden,):
        raise ValueError("LSTM parameter shapes inconsistent")
    h = np.zeros((n, hidden)) if h0 is None else h0.astype(np.float64)
    c = np.zeros((n, hidden)) if c0 is None else c0.astype(np.float64)
    h_seq = np.zeros((n, length, hidden))
    cache = {"x": x, "wx": wx, "wh": wh, "h0": h.copy(), "c0": c.copy(),
             "gates": [], "c_prev": [], "h_prev": [], "c_tanh": [], "c": []}
    for t in range(length):
        pre = x[:, t, :] @ wx + h @ wh + b
        i = _sigmoid(pre[:, :hidden])
        f = _sigmoid(pre[:, hidden:2 * hidden])
        g = np.tanh(pre[:, 2 * hidden:3 * hidden])
        o = _sigmoid(pre[:, 3 * hidden:])
        cache["c_prev"].append(c)
        cache["h_prev"].append(h)
        c = f * c + i * g
        ct = np.tanh(c)
        h = o * ct
        cache["gates"].append((i, f, g, o))
        cache["c_tanh"].append(ct)
        cache["c"].append(c)
        h_seq[:, t, :] = h
    return h_seq, h, c, cache


def lstm_backward(
    cache: dict,
    grad_h_seq: np.ndarray | None = None,
    grad_h_last: np.ndarray | None = None,
    grad_c_last: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Backprop through time for lstm_forward.

    Accepts upstream gradient on the full hidden sequence and/or on the
    final states. Returns (grad_x, grad_wx, grad_wh, grad_b).
    """
    x, wx, wh = cache["x"], cache["wx"], cache["wh"]
    n, length, d = x.shape
    hidden = wh.shape[0]
    grad_x = np.zeros_like(x, dtype=np.float64)
    grad_wx = np.zeros_like(wx, dtype=np.float64)
    grad_wh = np.zeros_like(wh, dtype=np.float64)
    grad_b = np.zeros(4 * hidden)
    dh = np.zeros((n, hidden)) if grad_h_last is None else grad_h_last.astype(np.float64).copy()
    dc = np.zeros((n, hidden)) if grad_c_last is None else grad_c_last.astype(np.float64).copy()
    for t in range(length - 1, -1, -1):
        if grad_h_seq is not None:
            dh = dh + grad_h_seq[:, t, :]
        i, f, g, o = cache["gates"][t]
        ct = cache["c_tanh"][t]
        c_prev = cache["c_prev"][t]
        h_prev = cache["h_prev"][t]
        do = dh * ct
        dc = dc + dh * o * (1.0 - ct * ct)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc = dc * f
        dpre = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)],
            axis=1,
        )
        grad_x[:, t, :] = dpre @ wx.T
        grad_wx += x[:, t, :].T @ dpre
        grad_wh += h_prev.T @ dpre
        grad_b += dpre.sum(axis=0)
        dh = dpre @ wh.T
    return grad_x, grad_wx, grad_wh, grad_b


# ---------------------------------------------------------------------------
# Parameter initialization
# ---------------------------------------------------------------------------

def _kaiming_uniform(rng: SplitMix64, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, shape)


def param_shapes(spec: ModelSpec) -> dict[str, tuple[int, ...]]:
    """Name -> shape map, in canonical order."""
    shapes: dict[str, tuple[int, ...]] = {}
    if spec.arch == "cnn":
        for mod in ("audio", "video"):
            c_in = 1
            for idx, c_out in enumerate(spec.conv_filters, start=1):
                shapes[f"{mod}_conv{idx}_w"] = (c_out, c_in, spec.kernel_size)
                shapes[f"{mod}_conv{idx}_b"] = (c_out,)
                c_in = c_out
    else:
        d, h = spec.lstm_feature_dim, spec.lstm_hidden
        for mod in ("audio", "video"):
            shapes[f"{mod}_lstm_wx"] = (d, 4 * h)
            shapes[f"{mod}_lstm_wh"] = (h, 4 * h)
            shapes[f"{mod}_lstm_b"] = (4 * h,)
    shapes["head1_w"] = (spec.fused_dim(), spec.head_hidden)
    shapes["head1_b"] = (spec.head_hidden,)
    shapes["out_w"] = (spec.head_hidden, spec.num_classes)
    shapes["out_b"] = (spec.num_classes,)
    return shapes


def param_count(spec: ModelSpec) -> int:
    return sum(int(np.prod(s)) for s in param_shapes(spec).values())


def init_params(spec: ModelSpec, seed: int) -> Params:
    """Deterministic initialization: Kaiming-uniform for conv/dense weights,
    uniform(-1/sqrt(H), 1/sqrt(H)) for LSTM matrices, zero biases except the
    LSTM forget-gate bias, set to 1.0."""
    params: Params = {}
    for name, shape in param_shapes(spec).items():
        rng = SplitMix64(derive_seed(seed, "init", name))
        if name.endswith("_b"):
            arr = np.zeros(shape)
            if "_lstm_" in name:
                h = spec.lstm_hidden
                arr[h:2 * h] = 1.0  # forget gate
        elif "_conv" in name:
            fan_in = shape[1] * shape[2]
            arr = _kaiming_uniform(rng, shape, fan_in)
        elif "_lstm_" in name:
            bound = 1.0 / np.sqrt(spec.lstm_hidden)
            arr = rng.uniform(-bound, bound, shape)
        else:  # dense
            arr = _kaiming_uniform(rng, shape, shape[0])
        params[name] = arr.astype(np.float32)
    return params


# ---------------------------------------------------------------------------
# Full model forward / backward
# ---------------------------------------------------------------------------

def _as64(params: Params) -> Params:
    return {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}


def _branch_forward(spec: ModelSpec, p: Params, mod: str, x: np.ndarray, cache: dict) -> np.ndarray:
    if spec.arch == "cnn":
        a = x[:, None, :]  # (N, 1, L)
        cache[f"{mod}_in"] = a
        z1 = conv1d_batch_forward(a, p[f"{mod}_conv1_w"], p[f"{mod}_conv1_b"])
        r1 = relu(z1)
        z2 = conv1d_batch_forward(r1, p[f"{mod}_conv2_w"], p[f"{mod}_conv2_b"])
        r2 = relu(z2)
        cache[f"{mod}_z1"], cache[f"{mod}_r1"] = z1, r1
        cache[f"{mod}_z2"], cache[f"{mod}_r2"] = z2, r2
        if spec.pooling == "avg":
            return global_avg_pool(r2)
        return r2.reshape(r2.shape[0], -1)
    seq = x.reshape(x.shape[0], spec.lstm_seq_len, spec.lstm_feature_dim)
    _, h_last, _, lstm_cache = lstm_forward(
        seq, p[f"{mod}_lstm_wx"], p[f"{mod}_lstm_wh"], p[f"{mod}_lstm_b"]
    )
    cache[f"{mod}_lstm"] = lstm_cache
    return h_last


def _branch_backward(spec: ModelSpec, p: Params, mod: str, cache: dict,
                     grad_feat: np.ndarray, grads: Params) -> None:
    if spec.arch == "cnn":
        r2 = cache[f"{mod}_r2"]
        if spec.pooling == "avg":
            length = r2.shape[2]
            grad_r2 = np.repeat(grad_feat[:, :, None], length, axis=2) / length
        else:
            grad_r2 = grad_feat.reshape(r2.shape)
        grad_z2 = relu_backward(cache[f"{mod}_z2"], grad_r2)
        grad_r1, gk2, gb2 = conv1d_batch_backward(
            cache[f"{mod}_r1"], p[f"{mod}_conv2_w"], grad_z2
        )
        grad_z1 = relu_backward(cache[f"{mod}_z1"], grad_r1)
        _, gk1, gb1 = conv1d_batch_backward(
            cache[f"{mod}_in"], p[f"{mod}_conv1_w"], grad_z1
        )
        grads[f"{mod}_conv1_w"], grads[f"{mod}_conv1_b"] = gk1, gb1
        grads[f"{mod}_conv2_w"], grads[f"{mod}_conv2_b"] = gk2, gb2
    else:
        _, gwx, gwh, gb = lstm_backward(cache[f"{mod}_lstm"], grad_h_last=grad_feat)
        grads[f"{mod}_lstm_wx"] = gwx
        grads[f"{mod}_lstm_wh"] = gwh
        grads[f"{mod}_lstm_b"] = gb


def model_forward(
    spec: ModelSpec,
    params: Params,
    audio: np.ndarray,
    video: np.ndarray,
    train: bool = False,
    rng: SplitMix64 | None = None,
) -> tuple[np.ndarray, dict]:
    """Compute logits for a batch of (audio, video) embedding pairs.

    audio/video: (N, input_dim) or (input_dim,). Returns (logits (N, 2) or
    (2,), cache for model_backward).
    """
    single = audio.ndim == 1
    audio = np.atleast_2d(np.asarray(audio, dtype=np.float64))
    video = np.atleast_2d(np.asarray(video, dtype=np.float64))
    if audio.shape[1] != spec.input_dim or video.shape[1] != spec.input_dim:
        raise ValueError(
            f"embedding dim ({audio.shape[1]}, {video.shape[1]}) != {spec.input_dim}"
        )
    p = _as64(params)
    cache: dict = {"train": train}
    a_feat = _branch_forward(spec, p, "audio", audio, cache)
    v_feat = _branch_forward(spec, p, "video", video, cache)
    fused = np.concatenate([a_feat, v_feat], axis=1)
    z_h = dense_forward(fused, p["head1_w"], p["head1_b"])
    r_h = relu(z_h)
    d_h, mask = dropout(r_h, spec.dropout_rate, train, rng)
    logits = dense_forward(d_h, p["out_w"], p["out_b"])
    cache.update(fused=fused, z_h=z_h, r_h=r_h, d_h=d_h, mask=mask, p64=p)
    return (logits[0] if single else logits), cache


def model_backward(spec: ModelSpec, params: Params, cache: dict,
                   grad_logits: np.ndarray) -> Params:
    """Gradients of all parameters given d(loss)/d(logits)."""
    if "p64" not in cache:
        raise ValueError("missing forward cache")
    p = cache["p64"]
    grad_logits = np.atleast_2d(np.asarray(grad_logits, dtype=np.float64))
    grads: Params = {}
    grad_dh, grads["out_w"], grads["out_b"] = dense_backward(
        cache["d_h"], p["out_w"], grad_logits
    )
    if cache["mask"] is not None:
        grad_dh = grad_dh * cache["mask"]
    grad_zh = relu_backward(cache["z_h"], grad_dh)
    grad_fused, grads["head1_w"], grads["head1_b"] = dense_backward(
        cache["fused"], p["head1_w"], grad_zh
    )
    half = spec.branch_dim()
    _branch_backward(spec, p, "audio", cache, grad_fused[:, :half], grads)
    _branch_backward(spec, p, "video", cache, grad_fused[:, half:], grads)
    return grads


def predict_proba(spec: ModelSpec, params: Params, audio: np.ndarray,
                  video: np.ndarray) -> np.ndarray:
    """Eval-mode class probabilities [non_humor, humor]."""
    logits, _ = model_forward(spec, params, audio, video, train=False)
    return softmax(logits)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def config_hash(spec: ModelSpec, seed: int) -> str:
    blob = json.dumps({"spec": spec.to_dict(), "seed": seed}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_model(
    path: str | Path,
    spec: ModelSpec,
    params: Params,
    seed: int,
    metrics: dict | None = None,
) -> None:
    """Write model JSON; parameters are base64 little-endian float32."""
    doc = {
        "format_version": FORMAT_VERSION,
        "spec": spec.to_dict(),
        "seed": seed,
        "config_hash": config_hash(spec, seed),
        "parameters": {
            name: {
                "shape": list(arr.shape),
                "data": base64.b64encode(
                    np.ascontiguousarray(arr, dtype="<f4").tobytes()
                ).decode("ascii"),
            }
            for name, arr in sorted(params.items())
        },
    }
    if metrics is not None:
        doc["metrics"] = metrics
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))


def load_model(path: str | Path, expect_config_hash: str | None = None):
    """Read a model JSON. Returns (spec, params, seed, doc).

    A config-hash mismatch against `expect_config_hash` is surfaced in
    doc["config_hash_mismatch"] rather than raised.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot parse model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format_version {doc.get('format_version')!r}"
            if isinstance(doc, dict) else f"{path}: not a model document"
        )
    try:
        spec = ModelSpec.from_dict(doc["spec"])
        seed = int(doc["seed"])
        params: Params = {}
        for name, entry in doc["parameters"].items():
            raw = base64.b64decode(entry["data"])
            shape = tuple(entry["shape"])
            arr = np.frombuffer(raw, dtype="<f4")
            if arr.size != int(np.prod(shape)):
                raise ModelFormatError(
                    f"{path}: parameter {name}: payload size {arr.size} != shape {shape}"
                )
            params[name] = arr.reshape(shape).copy()
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: corrupted model document: {exc}") from exc
    expected_shapes = param_shapes(spec)
    if set(params) != set(expected_shapes):
        raise ModelFormatError(f"{path}: parameter names do not match spec")
    for name, shape in expected_shapes.items():
        if params[name].shape != shape:
            raise ModelFormatError(
                f"{path}: parameter {name} shape {params[name].shape} != {shape}"
            )
    if expect_config_hash is not None and doc.get("config_hash") != expect_config_hash:
        doc["config_hash_mismatch"] = True
    return spec, params, seed, doc
