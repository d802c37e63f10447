"""
Dense feed-forward classifiers and their JSON weights file.

A layer maps ``x`` to ``activation(W @ x + b)`` with ``W`` stored as ``rows``
outputs by ``cols`` inputs, flattened row-major in the file::

    {"version": 1,
     "layers": [{"rows": 128, "cols": 784, "weights": [...], "bias": [...],
                 "activation": "relu"}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from swarmlab.errors import InvalidArgumentError, ModelError, ModelFormatError
from swarmlab.utils import atomic_write_text

FORMAT_VERSION = 1
INPUT_SIZE = 784
NUM_LABELS = 10
ACTIVATIONS = ("relu", "softmax", "none")


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "softmax":
        return softmax(z)
    return z


@dataclass(frozen=True, eq=False)
class Layer:
    weights: np.ndarray
    bias: np.ndarray
    activation: str = "none"

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float, copy=True)
        bias = np.array(self.bias, dtype=float, copy=True).reshape(-1)
        if weights.ndim != 2:
            raise ModelError(f"Layer weights must be a matrix, got shape {weights.shape}")
        if bias.size != weights.shape[0]:
            raise ModelError(f"Bias has {bias.size} entries for {weights.shape[0]} outputs")
        if self.activation not in ACTIVATIONS:
            raise ModelError(f"Unknown activation '{self.activation}' (known: {', '.join(ACTIVATIONS)})")
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise ModelError("Layer weights and bias must be finite")
        weights.flags.writeable = False
        bias.flags.writeable = False
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @property
    def rows(self) -> int:
        return int(self.weights.shape[0])

    @property
    def cols(self) -> int:
        return int(self.weights.shape[1])

    def pre_activation(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T + self.bias

    def forward(self, x: np.ndarray) -> np.ndarray:
        return apply_activation(self.activation, self.pre_activation(x))


@dataclass(frozen=True)
class ClassifierModel:
    """784 binary inputs to a softmax over 10 labels."""

    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        if not layers:
            raise ModelError("Model needs at least one layer")
        if layers[0].cols != INPUT_SIZE:
            raise ModelError(f"First layer takes {layers[0].cols} inputs, expected {INPUT_SIZE}")
        for k in range(1, len(layers)):
            if layers[k].cols != layers[k - 1].rows:
                raise ModelError(
                    f"Layer {k} takes {layers[k].cols} inputs but layer {k - 1} produces {layers[k - 1].rows}"
                )
        if layers[-1].rows != NUM_LABELS or layers[-1].activation != "softmax":
            raise ModelError(f"Final layer must produce {NUM_LABELS} outputs through softmax")
        object.__setattr__(self, "layers", layers)

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Confidences for a ``(batch, 784)`` input matrix."""
        x = np.asarray(inputs, dtype=float)
        if x.ndim != 2 or x.shape[1] != INPUT_SIZE:
            raise ModelError(f"Expected inputs of shape (batch, {INPUT_SIZE}), got {x.shape}")
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_from_first(self, first_pre_activation: np.ndarray) -> np.ndarray:
        """Finish a forward pass from first-layer pre-activations."""
        x = apply_activation(self.layers[0].activation, first_pre_activation)
        for layer in self.layers[1:]:
            x = layer.forward(x)
        return x


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


def _layer_from_dict(raw: object, index: int, path: str) -> Layer:
    if not isinstance(raw, dict):
        raise ModelFormatError(f"layers[{index}] must be an object", path=path)
    missing = [key for key in ("rows", "cols", "weights", "bias", "activation") if key not in raw]
    if missing:
        raise ModelFormatError(f"layers[{index}] is missing {', '.join(missing)}", path=path)
    rows, cols = raw["rows"], raw["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise ModelFormatError(f"layers[{index}] rows and cols must be positive integers", path=path)
    try:
        weights = np.asarray(raw["weights"], dtype=float)
        bias = np.asarray(raw["bias"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"layers[{index}] holds non-numeric values: {exc}", path=path) from exc
    if weights.shape != (rows * cols,):
        raise ModelFormatError(
            f"layers[{index}] declares {rows}x{cols} but stores {weights.size} weights", path=path
        )
    if bias.shape != (rows,):
        raise ModelFormatError(f"layers[{index}] declares {rows} rows but stores {bias.size} biases", path=path)
    try:
        return Layer(weights.reshape(rows, cols), bias, raw["activation"])
    except ModelError as exc:
        raise ModelFormatError(f"layers[{index}]: {exc}", path=path) from exc


def load_model(path: str | Path) -> ClassifierModel:
    name = str(path)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ModelFormatError(f"Cannot read weights file: {exc.strerror}", path=name) from exc
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError("Weights file is not UTF-8", path=name, offset=exc.start) from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(exc.msg, path=name, offset=_byte_offset(text, exc.pos)) from exc

    if not isinstance(document, dict):
        raise ModelFormatError("Weights file must hold a JSON object", path=name, offset=0)
    version = document.get("version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"Unsupported weights format version {version!r}", path=name)
    raw_layers = document.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ModelFormatError("'layers' must be a non-empty list", path=name)

    layers = [_layer_from_dict(raw, i, name) for i, raw in enumerate(raw_layers)]
    try:
        return ClassifierModel(tuple(layers))
    except ModelError as exc:
        raise ModelFormatError(str(exc), path=name) from exc


def model_to_dict(model: ClassifierModel) -> dict:
    return {
        "version": FORMAT_VERSION,
        "layers": [
            {
                "rows": layer.rows,
                "cols": layer.cols,
                "weights": layer.weights.reshape(-1).tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in model.layers
        ],
    }


def save_model(model: ClassifierModel, path: str | Path) -> Path:
    return atomic_write_text(path, json.dumps(model_to_dict(model)) + "\n")


def planted_model(
    pattern: Sequence[int] | np.ndarray,
    target_label: int,
    weight: float = 0.1,
    rival_logit: float = 0.0,
) -> ClassifierModel:
    """
    One softmax layer whose target logit is ``weight`` times the number of
    input bits agreeing with ``pattern``.

    Every other label gets the constant logit ``rival_logit``. The pattern is
    the unique most confident input for any rival logit; raising it (for
    example to half the full-match score) makes random images start near
    chance instead of near certainty.
    """
    bits = np.asarray(getattr(pattern, "bits", pattern), dtype=float).reshape(-1)
    if bits.size != INPUT_SIZE or np.any((bits != 0) & (bits != 1)):
        raise InvalidArgumentError(f"Pattern must be {INPUT_SIZE} binary values")
    if not 0 <= target_label < NUM_LABELS:
        raise InvalidArgumentError(f"target_label must lie in [0, {NUM_LABELS}), got {target_label}")
    if weight <= 0:
        raise InvalidArgumentError("weight must be positive")

    weights = np.zeros((NUM_LABELS, INPUT_SIZE))
    bias = np.full(NUM_LABELS, float(rival_logit))
    weights[target_label] = np.where(bits == 1, weight, -weight)
    bias[target_label] = weight * np.count_nonzero(bits == 0)
    return ClassifierModel((Layer(weights, bias, "softmax"),))
