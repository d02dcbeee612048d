"""Deterministic training loop for the toy segmentation network.

Heart and lung models are trained separately; this module trains one organ
at a time on (image, mask) pairs already sized to the model input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import BitMask, GrayImage
from ..errors import EmptyDatasetError, ShapeMismatchError
from .losses import total_loss
from .optim import Adam
from .tensor import Tensor
from .unet import ToyUNet, UNetConfig

PROB_THRESHOLD = 0.5


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 8
    epochs: int = 30
    seed: int = 0
    split: float = 0.9  # training fraction

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must lie in (0, 1)")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class TrainResult:
    model: ToyUNet
    history: list[dict] = field(default_factory=list)
    train_indices: list[int] = field(default_factory=list)
    val_indices: list[int] = field(default_factory=list)


def _image_array(img) -> np.ndarray:
    if isinstance(img, GrayImage):
        return img.pixels.astype(np.float64) / 255.0
    return np.asarray(img, dtype=np.float64)


def _mask_array(mask) -> np.ndarray:
    if isinstance(mask, BitMask):
        return mask.bits.astype(np.float64)
    return np.asarray(mask, dtype=np.float64)


def _stack(dataset, indices, size) -> tuple[np.ndarray, np.ndarray]:
    imgs = np.empty((len(indices), 1, size, size))
    masks = np.empty((len(indices), 1, size, size))
    for row, i in enumerate(indices):
        img, mask = dataset[i]
        a, m = _image_array(img), _mask_array(mask)
        if a.shape != (size, size) or m.shape != (size, size):
            raise ShapeMismatchError(
                f"sample {i} has shape {a.shape}/{m.shape}, expected {(size, size)}"
            )
        imgs[row, 0] = a
        masks[row, 0] = m
    return imgs, masks


def _batch_iou(probs: np.ndarray, masks: np.ndarray) -> float:
    pred = probs >= PROB_THRESHOLD
    truth = masks >= 0.5
    inter = np.count_nonzero(pred & truth)
    union = np.count_nonzero(pred | truth)
    return 1.0 if union == 0 else inter / union


def evaluate(model: ToyUNet, images: np.ndarray, masks: np.ndarray) -> tuple[float, float]:
    """(loss, IoU) of the model on a stacked batch, without gradients."""
    logits = model.forward(Tensor(images))
    loss = float(total_loss(logits, masks))
    sig = 1.0 / (1.0 + np.exp(-np.clip(logits.data, -500, 500)))
    return loss, _batch_iou(sig, masks)


def train(
    cfg: TrainConfig,
    unet_cfg: UNetConfig,
    dataset,
    lr: float = 1e-4,
    max_steps: int | None = None,
) -> TrainResult:
    """Train on a 90-10 style split of ``dataset`` (list of (image, mask)).

    Deterministic for a given seed: initialization, the split, and the
    per-epoch shuffles all derive from ``cfg.seed``.
    """
    n = len(dataset)
    if n == 0:
        raise EmptyDatasetError("dataset is empty")
    size = unet_cfg.input_size

    rng = np.random.default_rng(cfg.seed)
    model = ToyUNet(unet_cfg, seed=cfg.seed)
    opt = Adam(model.param_tensors(), lr=lr)

    perm = rng.permutation(n)
    n_val = int(round(n * (1.0 - cfg.split)))
    n_val = min(n_val, n - 1)  # keep at least one training sample
    val_idx = [int(i) for i in perm[:n_val]]
    train_idx = [int(i) for i in perm[n_val:]]

    train_imgs, train_masks = _stack(dataset, train_idx, size)
    if val_idx:
        val_imgs, val_masks = _stack(dataset, val_idx, size)

    result = TrainResult(model=model, train_indices=train_idx, val_indices=val_idx)
    steps = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_idx))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            if max_steps is not None and steps >= max_steps:
                break
            rows = order[start:start + cfg.batch_size]
            logits = model.forward(Tensor(train_imgs[rows]))
            loss = total_loss(logits, train_masks[rows])
            model.zero_grad()
            loss.backward()
            opt.step()
            losses.append(float(loss))
            steps += 1
        entry = {
            "epoch": epoch,
            "steps": steps,
            "train_loss": float(np.mean(losses)) if losses else None,
        }
        if val_idx:
            val_loss, val_iou = evaluate(model, val_imgs, val_masks)
            entry["val_loss"] = val_loss
            entry["val_iou"] = val_iou
        result.history.append(entry)
        if max_steps is not None and steps >= max_steps:
            break
    return result
