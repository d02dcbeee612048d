"""Segmentation backends: trained toy model or externally supplied masks.

Either way the result is a heart mask and a lung mask at the original
image resolution, ready for post-processing and measurement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import imageio
from .core import BitMask, GrayImage
from .errors import DimensionMismatchError, MissingMaskFileError
from .imgproc import equalize_histogram, resize, resize_mask
from .nn.unet import ToyUNet, load_weights, predict_probs

SOURCE_MODEL = "model"
SOURCE_FILE = "file"


@dataclass(frozen=True)
class SegmentationResult:
    heart: BitMask
    lungs: BitMask
    source: str
    model_resolution: int | None = None


@dataclass(frozen=True)
class FileMasks:
    """Backend that loads ground-truth or precomputed mask files."""

    def segment(self, image: GrayImage, heart_mask_path, lung_mask_path) -> SegmentationResult:
        if not heart_mask_path or not lung_mask_path:
            raise MissingMaskFileError("case has no heart/lung mask paths")
        heart = imageio.read_mask(heart_mask_path)
        lungs = imageio.read_mask(lung_mask_path)
        for name, mask in (("heart", heart), ("lung", lungs)):
            if mask.shape != image.shape:
                raise DimensionMismatchError(
                    f"{name} mask is {mask.width}x{mask.height}, "
                    f"image is {image.width}x{image.height}"
                )
        return SegmentationResult(heart=heart, lungs=lungs, source=SOURCE_FILE)


class ToyModelBackend:
    """Runs the trained heart and lung networks on an equalized, resized copy."""

    def __init__(self, heart_model: ToyUNet, lung_model: ToyUNet, threshold: float = 0.5):
        if heart_model.cfg.input_size != lung_model.cfg.input_size:
            raise DimensionMismatchError("heart and lung models disagree on input size")
        self.heart_model = heart_model
        self.lung_model = lung_model
        self.threshold = threshold

    @classmethod
    def from_files(cls, heart_path, lung_path, threshold: float = 0.5) -> "ToyModelBackend":
        return cls(load_weights(heart_path), load_weights(lung_path), threshold)

    def _predict(self, model: ToyUNet, prepared: np.ndarray, out_w: int, out_h: int) -> BitMask:
        probs = predict_probs(model, prepared)
        small = BitMask((probs >= self.threshold).astype(np.uint8))
        return resize_mask(small, out_w, out_h)

    def segment(self, image: GrayImage) -> SegmentationResult:
        size = self.heart_model.cfg.input_size
        eq = equalize_histogram(image)
        prepared = resize(eq, size, size, mode="bilinear").pixels.astype(np.float64) / 255.0
        heart = self._predict(self.heart_model, prepared, image.width, image.height)
        lungs = self._predict(self.lung_model, prepared, image.width, image.height)
        return SegmentationResult(
            heart=heart, lungs=lungs, source=SOURCE_MODEL, model_resolution=size
        )


def load_mask_file(path) -> BitMask:
    """Read a mask image file; see :func:`ctrkit.imageio.read_mask`."""
    return imageio.read_mask(path)
