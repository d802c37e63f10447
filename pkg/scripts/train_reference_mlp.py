#!/usr/bin/env python3
"""
Train a small 784-128-10 relu/softmax MLP on binarized MNIST IDX files.

The result is a weights file `swarmlab attack --model` accepts. This is a
plain mini-batch SGD trainer for desk-scale experiments, not a library API.

Usage:
    python scripts/train_reference_mlp.py \
        --images train-images-idx3-ubyte --labels train-labels-idx1-ubyte \
        --out mlp.json --epochs 5
"""

import argparse
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from swarmlab.idx import IMAGE_PIXELS, load_idx_images, load_idx_labels  # noqa: E402
from swarmlab.models import NUM_LABELS, ClassifierModel, Layer, save_model, softmax  # noqa: E402
from swarmlab.rich_utils import create_bar_progress, print_info, print_success  # noqa: E402


def init_weights(rng: np.random.Generator, hidden: int) -> list[np.ndarray]:
    w1 = rng.normal(0.0, np.sqrt(2.0 / IMAGE_PIXELS), size=(hidden, IMAGE_PIXELS))
    w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), size=(NUM_LABELS, hidden))
    return [w1, np.zeros(hidden), w2, np.zeros(NUM_LABELS)]


def train(x: np.ndarray, y: np.ndarray, hidden: int, epochs: int, lr: float, batch: int, seed: int):
    rng = np.random.default_rng(seed)
    w1, b1, w2, b2 = init_weights(rng, hidden)
    onehot = np.eye(NUM_LABELS)[y]

    with create_bar_progress("Training") as progress:
        task = progress.add_task("Training", total=epochs)
        for _ in range(epochs):
            order = rng.permutation(len(x))
            for start in range(0, len(x), batch):
                idx = order[start : start + batch]
                xb, tb = x[idx], onehot[idx]
                h_pre = xb @ w1.T + b1
                h = np.maximum(h_pre, 0.0)
                probs = softmax(h @ w2.T + b2)

                grad_out = (probs - tb) / len(idx)
                grad_w2 = grad_out.T @ h
                grad_b2 = grad_out.sum(axis=0)
                grad_h = (grad_out @ w2) * (h_pre > 0)
                grad_w1 = grad_h.T @ xb
                grad_b1 = grad_h.sum(axis=0)

                w1 -= lr * grad_w1
                b1 -= lr * grad_b1
                w2 -= lr * grad_w2
                b2 -= lr * grad_b2
            progress.advance(task)

    return ClassifierModel((Layer(w1, b1, "relu"), Layer(w2, b2, "softmax")))


def main() -> None:
    parser = argparse.ArgumentParser(description="Train a reference MLP for swarmlab attacks")
    parser.add_argument("--images", type=Path, required=True)
    parser.add_argument("--labels", type=Path, required=True)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--hidden", type=int, default=128)
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--lr", type=float, default=0.1)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--threshold", type=int, default=128)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    images = load_idx_images(args.images).reshape(-1, IMAGE_PIXELS)
    labels = load_idx_labels(args.labels).astype(int)
    x = (images >= args.threshold).astype(float)

    model = train(x, labels, args.hidden, args.epochs, args.lr, args.batch, args.seed)
    accuracy = float(np.mean(np.argmax(model.forward(x), axis=1) == labels))
    print_info(f"Training accuracy on binarized images: {accuracy:.2%}")
    save_model(model, args.out)
    print_success(f"Weights written to {args.out}")


if __name__ == "__main__":
    main()
