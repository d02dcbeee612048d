"""Core value types: grayscale images, binary masks, points and segments.

Coordinate convention throughout the toolkit: ``x`` is the column index
increasing rightward, ``y`` is the row index increasing downward, so
screen-left is low ``x``. Arrays are indexed ``[y, x]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyMaskError

MAX_INTENSITY = 255  # L - 1 for 8-bit images


class GrayImage:
    """Immutable 2-D grayscale image with intensities in [0, 255]."""

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("image must be a nonempty 2-D grid")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > MAX_INTENSITY):
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GrayImage is immutable")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self):
        return self.pixels.shape

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


class BitMask:
    """Immutable 2-D binary mask; every element is 0 or 1."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("mask must be a nonempty 2-D grid")
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
        else:
            if not np.isin(arr, (0, 1)).all():
                raise ValueError("mask elements must be 0 or 1")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    def __setattr__(self, name, value):
        raise AttributeError("BitMask is immutable")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self):
        return self.bits.shape

    def count(self) -> int:
        """Number of set bits."""
        return int(self.bits.sum())

    def __eq__(self, other):
        return isinstance(other, BitMask) and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"BitMask({self.width}x{self.height}, {self.count()} set)"


@dataclass(frozen=True)
class Point:
    """Pixel location; integral for mask extremes, fractional after scaling."""

    x: float
    y: float

    def as_tuple(self):
        return (self.x, self.y)


def distance(a: Point, b: Point) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class Segment:
    """A drawable line between two points; length is the Euclidean distance."""

    a: Point
    b: Point

    @property
    def length_px(self) -> float:
        return distance(self.a, self.b)


def require_same_shape(a, b, what="grids"):
    if a.shape != b.shape:
        raise DimensionMismatchError(f"{what} differ in shape: {a.shape} vs {b.shape}")


def extreme_points(mask: BitMask) -> tuple[Point, Point]:
    """Leftmost and rightmost set pixels of ``mask``.

    Ties at equal x resolve to the topmost (minimal y) pixel. Raises
    :class:`EmptyMaskError` when no bit is set.
    """
    bits = mask.bits
    cols = bits.any(axis=0)
    if not cols.any():
        raise EmptyMaskError("mask has no set bits")
    xs = np.flatnonzero(cols)
    left_x = int(xs[0])
    right_x = int(xs[-1])
    left_y = int(np.flatnonzero(bits[:, left_x])[0])
    right_y = int(np.flatnonzero(bits[:, right_x])[0])
    return Point(left_x, left_y), Point(right_x, right_y)
