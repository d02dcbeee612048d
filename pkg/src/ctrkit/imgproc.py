"""Intensity normalization, resizing, and training-time augmentation.

Histogram equalization remaps each pixel through the cumulative intensity
distribution: g = floor((L-1) * cum_p(f)) with L = 256. The floor is
computed in integer arithmetic, so results are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import BitMask, GrayImage, require_same_shape
from .errors import ZeroDimensionError

MASK_BINARIZE_THRESHOLD = 0.5  # after any geometric interpolation


@dataclass(frozen=True)
class AugmentConfig:
    """Randomized augmentation parameters for one sample draw.

    ``rotation_deg_range`` is a closed interval; noise/blur are applied to
    the image only, each with its own probability. All randomness comes
    from ``seed``, so a config is a deterministic transform.
    """

    rotation_deg_range: tuple[float, float] = (-8.0, 8.0)
    hflip_enabled: bool = False
    noise_sigma: float = 8.0
    blur_sigma: float = 1.0
    noise_prob: float = 0.5
    blur_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.rotation_deg_range
        if not (-180.0 <= lo <= hi <= 180.0):
            raise ValueError("rotation range must be ordered and within [-180, 180]")
        if self.noise_sigma < 0 or self.blur_sigma < 0:
            raise ValueError("sigmas must be >= 0")
        if not (0.0 <= self.noise_prob <= 1.0 and 0.0 <= self.blur_prob <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")


def equalize_histogram(img: GrayImage) -> GrayImage:
    """Global histogram equalization (exact integer floor)."""
    pixels = img.pixels
    hist = np.bincount(pixels.ravel(), minlength=256)
    cum = np.cumsum(hist, dtype=np.int64)
    # g(f) = floor(255 * cum(f) / total), computed exactly in integers
    lut = (255 * cum) // int(pixels.size)
    return GrayImage(lut[pixels].astype(np.uint8))


def _src_coords(n_out: int, n_in: int) -> np.ndarray:
    # pixel-center mapping: src = (dst + 0.5) * (in / out) - 0.5
    scale = n_in / n_out
    return (np.arange(n_out) + 0.5) * scale - 0.5


def _resize_nearest(arr: np.ndarray, w: int, h: int) -> np.ndarray:
    sy = np.clip(np.floor(_src_coords(h, arr.shape[0]) + 0.5), 0, arr.shape[0] - 1).astype(int)
    sx = np.clip(np.floor(_src_coords(w, arr.shape[1]) + 0.5), 0, arr.shape[1] - 1).astype(int)
    return arr[np.ix_(sy, sx)]


def _resize_bilinear(arr: np.ndarray, w: int, h: int) -> np.ndarray:
    fy = np.clip(_src_coords(h, arr.shape[0]), 0, arr.shape[0] - 1)
    fx = np.clip(_src_coords(w, arr.shape[1]), 0, arr.shape[1] - 1)
    y0 = np.floor(fy).astype(int)
    x0 = np.floor(fx).astype(int)
    y1 = np.minimum(y0 + 1, arr.shape[0] - 1)
    x1 = np.minimum(x0 + 1, arr.shape[1] - 1)
    wy = (fy - y0)[:, None]
    wx = (fx - x0)[None, :]
    a = arr.astype(np.float64)
    top = a[np.ix_(y0, x0)] * (1 - wx) + a[np.ix_(y0, x1)] * wx
    bot = a[np.ix_(y1, x0)] * (1 - wx) + a[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def resize(img: GrayImage, w: int, h: int, mode: str = "bilinear") -> GrayImage:
    """Resample to ``w`` x ``h``; ``nearest`` preserves the exact value set."""
    if w < 1 or h < 1:
        raise ZeroDimensionError(f"target dimensions must be >= 1, got {w}x{h}")
    if mode == "nearest":
        return GrayImage(_resize_nearest(img.pixels, w, h))
    if mode == "bilinear":
        out = _resize_bilinear(img.pixels, w, h)
        return GrayImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))
    raise ValueError(f"unknown resize mode: {mode!r}")


def resize_mask(mask: BitMask, w: int, h: int) -> BitMask:
    """Nearest-neighbor mask resize; binarity is preserved exactly."""
    if w < 1 or h < 1:
        raise ZeroDimensionError(f"target dimensions must be >= 1, got {w}x{h}")
    return BitMask(_resize_nearest(mask.bits, w, h))


def _rotate(arr: np.ndarray, angle_deg: float) -> np.ndarray:
    # bilinear about the image center, outside filled with 0
    return ndimage.rotate(
        arr, angle_deg, reshape=False, order=1, mode="constant", cval=0.0, prefilter=False
    )


def augment_sample(
    img: GrayImage, mask: BitMask, cfg: AugmentConfig
) -> tuple[GrayImage, BitMask]:
    """One augmentation draw: shared spatial transform, image-only noise/blur.

    The same rotation/flip is applied to image and mask so they stay
    aligned; the mask is re-binarized at 0.5 after interpolation. With an
    identity config (zero rotation range, flip off, zero probabilities)
    the inputs are returned unchanged, bit for bit.
    """
    require_same_shape(img, mask, "image and mask")
    rng = np.random.default_rng(cfg.seed)

    lo, hi = cfg.rotation_deg_range
    angle = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
    do_flip = cfg.hflip_enabled and rng.random() < 0.5
    do_noise = rng.random() < cfg.noise_prob and cfg.noise_sigma > 0
    do_blur = rng.random() < cfg.blur_prob and cfg.blur_sigma > 0

    pix = img.pixels.astype(np.float64)
    bits = mask.bits.astype(np.float64)

    if angle != 0.0:
        pix = _rotate(pix, angle)
        bits = _rotate(bits, angle)
    if do_flip:
        pix = pix[:, ::-1]
        bits = bits[:, ::-1]
    if do_noise:
        pix = pix + rng.normal(0.0, cfg.noise_sigma, size=pix.shape)
    if do_blur:
        pix = ndimage.gaussian_filter(pix, sigma=cfg.blur_sigma, mode="nearest")

    out_img = GrayImage(np.clip(np.rint(pix), 0, 255).astype(np.uint8))
    out_mask = BitMask((bits >= MASK_BINARIZE_THRESHOLD).astype(np.uint8))
    return out_img, out_mask
