"""Small convolutional cone/not-cone classifier, trained from scratch.

Plain NumPy implementation: valid-padding convolutions via im2col, ReLU,
max pooling, fully connected layers and a two-way softmax, trained by
mini-batch SGD on cross-entropy plus an L1 weight penalty. The analytic
gradients are exercised against finite differences in the test suite, so
everything runs in float64.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from conedrive.vision.colorspace import LabImage, rgb_to_lab

LABEL_CONE = "cone"
LABEL_NOT_CONE = "not_cone"


@dataclass(frozen=True)
class ClassifierConfig:
    input_size: int = 32
    conv_layers: tuple[tuple[int, int, int], ...] = ((8, 5, 1), (16, 3, 1))  # (filters, kernel, stride)
    pool: int = 2
    fc_widths: tuple[int, ...] = (64,)
    l1_lambda: float = 1e-4
    learning_rate: float = 1e-3
    batch_size: int = 64
    iterations: int = 2000
    dropout: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.conv_layers) < 1:
            raise ValueError("need at least one conv layer")
        if self.l1_lambda < 0:
            raise ValueError("l1_lambda must be non-negative")
        object.__setattr__(self, "conv_layers", tuple(tuple(c) for c in self.conv_layers))
        object.__setattr__(self, "fc_widths", tuple(self.fc_widths))

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass
class ModelWeights:
    config: ClassifierConfig
    arrays: list[np.ndarray]  # alternating W, b per layer, conv layers first

    def weight_arrays(self) -> list[np.ndarray]:
        return self.arrays[0::2]

    def l1_norm(self) -> float:
        return float(sum(np.abs(w).sum() for w in self.weight_arrays()))


@dataclass(frozen=True)
class CropSample:
    image: np.ndarray  # (S, S, 3) uint8 RGB
    label: str
    source_id: str = ""

    def __post_init__(self):
        if self.label not in (LABEL_CONE, LABEL_NOT_CONE):
            raise ValueError(f"unknown label {self.label!r}")


def lab_to_input(lab_data: np.ndarray) -> np.ndarray:
    """Scale LAB channels to roughly [-1, 1] for the network."""
    out = np.empty_like(lab_data, dtype=np.float64)
    out[..., 0] = (lab_data[..., 0] - 50.0) / 50.0
    out[..., 1] = lab_data[..., 1] / 110.0
    out[..., 2] = lab_data[..., 2] / 110.0
    return out


def crop_to_input(crop_rgb: np.ndarray) -> np.ndarray:
    return lab_to_input(rgb_to_lab(crop_rgb).data)


def _layer_shapes(config: ClassifierConfig) -> list[tuple[str, tuple]]:
    """Shapes of all weight/bias arrays plus intermediate sanity checks."""
    shapes: list[tuple[str, tuple]] = []
    size, channels = config.input_size, 3
    for filters, kernel, stride in config.conv_layers:
        if size < kernel:
            raise ValueError("feature map smaller than kernel")
        shapes.append(("conv_w", (channels, kernel, kernel, filters)))
        shapes.append(("conv_b", (filters,)))
        size = (size - kernel) // stride + 1
        size = size // config.pool
        if size < 1:
            raise ValueError("network too deep for input size")
        channels = filters
    features = size * size * channels
    for width in config.fc_widths:
        shapes.append(("fc_w", (features, width)))
        shapes.append(("fc_b", (width,)))
        features = width
    shapes.append(("fc_w", (features, 2)))
    shapes.append(("fc_b", (2,)))
    return shapes


def init_weights(config: ClassifierConfig, rng: np.random.Generator) -> ModelWeights:
    arrays = []
    for kind, shape in _layer_shapes(config):
        if kind.endswith("_b"):
            arrays.append(np.zeros(shape))
        else:
            fan_in = int(np.prod(shape[:-1]))
            arrays.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), shape))
    return ModelWeights(config=config, arrays=arrays)


def _im2col(x: np.ndarray, kernel: int, stride: int) -> tuple[np.ndarray, tuple]:
    windows = sliding_window_view(x, (kernel, kernel), axis=(1, 2))
    windows = windows[:, ::stride, ::stride]  # (N, OH, OW, C, k, k)
    n, oh, ow = windows.shape[:3]
    cols = windows.reshape(n * oh * ow, x.shape[3] * kernel * kernel)
    return cols, (n, oh, ow)


def _col2im(dcols: np.ndarray, x_shape: tuple, kernel: int, stride: int, out_hw: tuple) -> np.ndarray:
    n, h, w, c = x_shape
    oh, ow = out_hw
    dc = dcols.reshape(n, oh, ow, c, kernel, kernel)
    dx = np.zeros(x_shape, dtype=dcols.dtype)
    for a in range(kernel):
        for b in range(kernel):
            dx[:, a : a + stride * (oh - 1) + 1 : stride, b : b + stride * (ow - 1) + 1 : stride, :] += dc[
                :, :, :, :, a, b
            ]
    return dx


def _maxpool(x: np.ndarray, p: int):
    n, h, w, c = x.shape
    oh, ow = h // p, w // p
    cropped = x[:, : oh * p, : ow * p, :]
    tiles = cropped.reshape(n, oh, p, ow, p, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, oh, ow, c, p * p)
    idx = np.argmax(tiles, axis=-1)
    out = np.take_along_axis(tiles, idx[..., None], axis=-1)[..., 0]
    return out, idx


def _maxpool_backward(dout: np.ndarray, idx: np.ndarray, x_shape: tuple, p: int) -> np.ndarray:
    n, h, w, c = x_shape
    oh, ow = h // p, w // p
    tiles = np.zeros((n, oh, ow, c, p * p), dtype=dout.dtype)
    np.put_along_axis(tiles, idx[..., None], dout[..., None], axis=-1)
    dx = np.zeros(x_shape, dtype=dout.dtype)
    dx[:, : oh * p, : ow * p, :] = tiles.reshape(n, oh, ow, c, p, p).transpose(0, 1, 4, 2, 5, 3).reshape(
        n, oh * p, ow * p, c
    )
    return dx


def _forward(
    arrays: list[np.ndarray],
    config: ClassifierConfig,
    x: np.ndarray,
    dropout_rng: np.random.Generator | None = None,
):
    """Run the network, returning logits and the caches backward needs."""
    caches = []
    idx = 0
    for layer, (filters, kernel, stride) in enumerate(config.conv_layers):
        w, b = arrays[idx], arrays[idx + 1]
        idx += 2
        cols, (n, oh, ow) = _im2col(x, kernel, stride)
        z = (cols @ w.reshape(-1, filters) + b).reshape(n, oh, ow, filters)
        mask = z > 0
        a = z * mask
        pooled, pool_idx = _maxpool(a, config.pool)
        caches.append(
            ("conv", cols, x.shape, (oh, ow), kernel, stride, mask, pool_idx, a.shape, w, layer == 0)
        )
        x = pooled

    n = x.shape[0]
    shape_before_flatten = x.shape
    a = x.reshape(n, -1)
    caches.append(("flatten", shape_before_flatten))

    n_fc = len(config.fc_widths) + 1
    for layer in range(n_fc):
        w, b = arrays[idx], arrays[idx + 1]
        idx += 2
        z = a @ w + b
        if layer < n_fc - 1:
            mask = z > 0
            h = z * mask
            drop = None
            if config.dropout > 0.0 and dropout_rng is not None:
                drop = (dropout_rng.random(h.shape) >= config.dropout) / (1.0 - config.dropout)
                h = h * drop
            caches.append(("fc", a, w, mask, drop))
            a = h
        else:
            caches.append(("fc_out", a, w))
            a = z
    return a, caches


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(
    weights: ModelWeights,
    x: np.ndarray,
    labels: np.ndarray,
    dropout_rng: np.random.Generator | None = None,
) -> tuple[float, list[np.ndarray]]:
    """Cross-entropy + L1 objective and its gradient for a batch.

    ``labels`` is an int array, 1 for cone. At w=0 the L1 subgradient is
    taken as 0, so unused weights do not oscillate.
    """
    config = weights.config
    arrays = weights.arrays
    logits, caches = _forward(arrays, config, x, dropout_rng)
    probs = _softmax(logits)
    n = len(labels)
    data_loss = float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))
    reg_loss = config.l1_lambda * weights.l1_norm()

    grads = [np.zeros_like(a) for a in arrays]
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n

    idx = len(arrays)
    d = dlogits
    for cache in reversed(caches):
        kind = cache[0]
        if kind == "fc_out":
            _, a_in, w = cache
            idx -= 2
            grads[idx] = a_in.T @ d
            grads[idx + 1] = d.sum(axis=0)
            d = d @ w.T
        elif kind == "fc":
            _, a_in, w, mask, drop = cache
            if drop is not None:
                d = d * drop
            d = d * mask
            idx -= 2
            grads[idx] = a_in.T @ d
            grads[idx + 1] = d.sum(axis=0)
            d = d @ w.T
        elif kind == "flatten":
            d = d.reshape(cache[1])
        else:  # conv
            _, cols, x_shape, (oh, ow), kernel, stride, mask, pool_idx, a_shape, w, is_input = cache
            d = _maxpool_backward(d, pool_idx, a_shape, config.pool)
            d = d * mask
            filters = w.shape[-1]
            d2 = d.reshape(-1, filters)
            idx -= 2
            grads[idx] = (cols.T @ d2).reshape(w.shape)
            grads[idx + 1] = d2.sum(axis=0)
            if not is_input:  # the input image needs no gradient
                dcols = d2 @ w.reshape(-1, filters).T
                d = _col2im(dcols, x_shape, kernel, stride, (oh, ow))

    if config.l1_lambda > 0.0:
        for i in range(0, len(arrays), 2):
            grads[i] = grads[i] + config.l1_lambda * np.sign(arrays[i])
    return data_loss + reg_loss, grads


def scores_batch(weights: ModelWeights, inputs: np.ndarray) -> np.ndarray:
    """Cone probabilities for pre-normalized inputs (N, S, S, 3)."""
    logits, _ = _forward(weights.arrays, weights.config, inputs, dropout_rng=None)
    return _softmax(logits)[:, 1]


def cnn_forward(weights: ModelWeights, lab: LabImage) -> float:
    """Cone probability of one LAB crop."""
    s = weights.config.input_size
    if lab.width != s or lab.height != s:
        raise ValueError(f"crop must be {s}x{s}, got {lab.width}x{lab.height}")
    x = lab_to_input(lab.data)[None]
    return float(scores_batch(weights, x)[0])


def cnn_train(
    config: ClassifierConfig, corpus: list[CropSample], dtype=np.float32
) -> tuple[ModelWeights, list[float]]:
    """Mini-batch SGD over the corpus; returns weights and per-iteration loss.

    Training runs in float32 by default; pass float64 when gradients are
    being compared against finite differences.
    """
    labels = np.array([1 if s.label == LABEL_CONE else 0 for s in corpus])
    if len(np.unique(labels)) < 2:
        raise ValueError("training corpus must contain both classes")
    inputs = np.stack([crop_to_input(s.image) for s in corpus]).astype(dtype)

    rng = np.random.default_rng(config.rng_seed)
    weights = init_weights(config, rng)
    weights.arrays = [a.astype(dtype) for a in weights.arrays]
    dropout_rng = np.random.default_rng(config.rng_seed + 1) if config.dropout > 0 else None

    losses = []
    batch_size = min(config.batch_size, len(corpus))
    order = rng.permutation(len(corpus))
    cursor = 0
    for _ in range(config.iterations):
        if cursor + batch_size > len(order):
            order = rng.permutation(len(corpus))
            cursor = 0
        batch = order[cursor : cursor + batch_size]
        cursor += batch_size
        loss, grads = loss_and_grads(weights, inputs[batch], labels[batch], dropout_rng)
        for arr, g in zip(weights.arrays, grads):
            arr -= config.learning_rate * g
        losses.append(loss)
    return weights, losses


def save_weights(weights: ModelWeights, path: str | Path) -> None:
    doc = {
        "config": asdict(weights.config),
        "config_hash": weights.config.config_hash(),
        "layers": [{"shape": list(a.shape), "data": a.ravel().tolist()} for a in weights.arrays],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_weights(path: str | Path) -> ModelWeights:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    cfg_dict = doc["config"]
    cfg_dict["conv_layers"] = tuple(tuple(c) for c in cfg_dict["conv_layers"])
    cfg_dict["fc_widths"] = tuple(cfg_dict["fc_widths"])
    config = ClassifierConfig(**cfg_dict)
    if doc.get("config_hash") != config.config_hash():
        raise ValueError("weights file config hash mismatch")
    arrays = []
    for layer, (kind, shape) in zip(doc["layers"], _layer_shapes(config)):
        arr = np.asarray(layer["data"], dtype=np.float64).reshape(layer["shape"])
        if tuple(arr.shape) != shape:
            raise ValueError(f"layer shape {arr.shape} does not match config {shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("weights must be finite")
        arrays.append(arr)
    if len(arrays) != len(_layer_shapes(config)):
        raise ValueError("wrong number of layers for config")
    return ModelWeights(config=config, arrays=arrays)
