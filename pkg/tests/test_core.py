import numpy as np
import pytest

from ctrkit.core import BitMask, GrayImage, Point, Segment, distance, extreme_points
from ctrkit.errors import EmptyMaskError


def mask_from_points(w, h, pts):
    arr = np.zeros((h, w), dtype=np.uint8)
    for x, y in pts:
        arr[y, x] = 1
    return BitMask(arr)


def scan_extremes(mask):
    # exhaustive oracle: scan every set bit, min/max x with min-y tie break
    pts = [(x, y) for y in range(mask.height) for x in range(mask.width)
           if mask.bits[y, x]]
    left = min(pts, key=lambda p: (p[0], p[1]))
    right = max(pts, key=lambda p: (p[0], -p[1]))
    return left, right


def test_single_pixel_mask():
    m = mask_from_points(5, 5, [(2, 3)])
    left, right = extreme_points(m)
    assert (left.x, left.y) == (2, 3)
    assert (right.x, right.y) == (2, 3)


def test_three_pixel_mask():
    m = mask_from_points(5, 5, [(1, 0), (1, 4), (3, 2)])
    left, right = extreme_points(m)
    assert (left.x, left.y) == (1, 0)  # tie at x=1 goes to the topmost
    assert (right.x, right.y) == (3, 2)


def test_empty_mask_raises():
    m = BitMask(np.zeros((5, 5), dtype=np.uint8))
    with pytest.raises(EmptyMaskError):
        extreme_points(m)


def test_extremes_match_exhaustive_scan():
    rng = np.random.default_rng(42)
    for _ in range(200):
        arr = (rng.random((32, 32)) < 0.15).astype(np.uint8)
        if not arr.any():
            arr[rng.integers(32), rng.integers(32)] = 1
        m = BitMask(arr)
        left, right = extreme_points(m)
        oleft, oright = scan_extremes(m)
        assert (left.x, left.y) == oleft
        assert (right.x, right.y) == oright
        assert left.x <= right.x


def test_segment_length_symmetric():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = Point(float(rng.uniform(0, 100)), float(rng.uniform(0, 100)))
        b = Point(float(rng.uniform(0, 100)), float(rng.uniform(0, 100)))
        assert distance(a, b) == distance(b, a)
        assert Segment(a, b).length_px == Segment(b, a).length_px


def test_grayimage_validation():
    with pytest.raises(ValueError):
        GrayImage(np.array([[300, 0]]))
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 4)))
    img = GrayImage(np.zeros((2, 3), dtype=np.uint8))
    assert (img.width, img.height) == (3, 2)
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1  # immutable buffer


def test_bitmask_validation():
    with pytest.raises(ValueError):
        BitMask(np.array([[2, 0]]))
    m = BitMask(np.array([[True, False]]))
    assert m.bits.dtype == np.uint8
    assert m.count() == 1
