"""MNIST-style IDX containers: big-endian magic, dimensions, raw bytes."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from swarmlab.errors import IdxFormatError, IdxTruncationError, InvalidArgumentError
from swarmlab.utils import atomic_write_bytes

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
IMAGE_SIDE = 28
IMAGE_PIXELS = IMAGE_SIDE * IMAGE_SIDE

_U32 = np.dtype(">u4")


def _read(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IdxFormatError(f"Cannot read IDX file: {exc.strerror}", path=str(path)) from exc


def _header(data: bytes, words: int, path: str, magic: int, kind: str) -> np.ndarray:
    """Check the magic word first, then read the remaining header words."""
    if len(data) < _U32.itemsize:
        raise IdxTruncationError(
            f"Header needs {_U32.itemsize} bytes for the magic number, file has {len(data)}",
            path=path,
            offset=len(data),
        )
    found = int(np.frombuffer(data, dtype=_U32, count=1)[0])
    if found != magic:
        raise IdxFormatError(f"Expected {kind} magic 0x{magic:08x}, found 0x{found:08x}", path=path, offset=0)
    size = words * _U32.itemsize
    if len(data) < size:
        raise IdxTruncationError(
            f"Header needs {size} bytes, file has {len(data)}", path=path, offset=len(data)
        )
    return np.frombuffer(data, dtype=_U32, count=words)


def load_idx_images(path: str | Path) -> np.ndarray:
    """Load a ``(count, 28, 28)`` uint8 image array."""
    data = _read(path)
    name = str(path)
    _, count, rows, cols = (int(v) for v in _header(data, 4, name, IMAGES_MAGIC, "image"))
    if rows != IMAGE_SIDE or cols != IMAGE_SIDE:
        raise IdxFormatError(f"Expected {IMAGE_SIDE}x{IMAGE_SIDE} images, found {rows}x{cols}", path=name, offset=8)
    expected = 16 + count * rows * cols
    if len(data) != expected:
        raise IdxTruncationError(
            f"Declared {count} images need {expected} bytes, file has {len(data)}",
            path=name,
            offset=min(len(data), expected),
        )
    pixels = np.frombuffer(data, dtype=np.uint8, offset=16)
    return pixels.reshape(count, rows, cols).copy()


def load_idx_labels(path: str | Path) -> np.ndarray:
    data = _read(path)
    name = str(path)
    _, count = (int(v) for v in _header(data, 2, name, LABELS_MAGIC, "label"))
    expected = 8 + count
    if len(data) != expected:
        raise IdxTruncationError(
            f"Declared {count} labels need {expected} bytes, file has {len(data)}",
            path=name,
            offset=min(len(data), expected),
        )
    return np.frombuffer(data, dtype=np.uint8, offset=8).copy()


def encode_idx_images(images: np.ndarray) -> bytes:
    arr = np.asarray(images)
    if arr.ndim == 2:
        arr = arr.reshape(arr.shape[0], IMAGE_SIDE, IMAGE_SIDE)
    if arr.ndim != 3 or arr.shape[1:] != (IMAGE_SIDE, IMAGE_SIDE):
        raise InvalidArgumentError(f"Images must be (count, 28, 28), got {arr.shape}")
    if arr.min(initial=0) < 0 or arr.max(initial=0) > 255:
        raise InvalidArgumentError("Pixel values must lie in 0-255")
    header = np.array([IMAGES_MAGIC, arr.shape[0], IMAGE_SIDE, IMAGE_SIDE], dtype=_U32)
    return header.tobytes() + arr.astype(np.uint8).tobytes()


def write_idx_images(path: str | Path, images: np.ndarray) -> Path:
    return atomic_write_bytes(path, encode_idx_images(images))


def write_idx_labels(path: str | Path, labels: np.ndarray) -> Path:
    arr = np.asarray(labels).reshape(-1)
    header = np.array([LABELS_MAGIC, arr.size], dtype=_U32)
    return atomic_write_bytes(path, header.tobytes() + arr.astype(np.uint8).tobytes())


def filter_by_label(images: np.ndarray, labels: np.ndarray, label: int) -> np.ndarray:
    if len(images) != len(labels):
        raise InvalidArgumentError(f"{len(images)} images but {len(labels)} labels")
    return images[np.asarray(labels) == label]
