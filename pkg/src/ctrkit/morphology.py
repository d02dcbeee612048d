"""Binary morphology and component analysis for predicted masks.

Post-processing order follows the measurement pipeline: close the mask
(dilation then erosion) to fill holes, label 4-connected components, then
apply the organ selection rules (two largest for lungs, thresholded
center-closest for the heart).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BitMask
from .errors import NoQualifyingComponentError, TooFewComponentsError


@dataclass(frozen=True)
class StructuringElement:
    """Square structuring element with odd side length."""

    side: int = 3

    def __post_init__(self):
        if self.side < 1 or self.side % 2 == 0:
            raise ValueError("structuring element side must be odd and >= 1")

    @property
    def radius(self) -> int:
        return self.side // 2


@dataclass(frozen=True)
class Component:
    """One 4-connected region of set pixels.

    ``pixels`` is an (N, 2) array of (x, y) coordinates in scan order;
    ``bbox`` is (min_x, min_y, max_x, max_y) inclusive.
    """

    label: int
    area: int
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]
    pixels: np.ndarray

    def pixel_set(self) -> set[tuple[int, int]]:
        return {(int(x), int(y)) for x, y in self.pixels}

    @property
    def min_x(self) -> int:
        return self.bbox[0]

    @property
    def max_x(self) -> int:
        return self.bbox[2]


def _shift_or(acc: np.ndarray, src: np.ndarray, dy: int, dx: int) -> None:
    h, w = src.shape
    ys = slice(max(dy, 0), h + min(dy, 0))
    xs = slice(max(dx, 0), w + min(dx, 0))
    yd = slice(max(-dy, 0), h + min(-dy, 0))
    xd = slice(max(-dx, 0), w + min(-dx, 0))
    acc[ys, xs] |= src[yd, xd]


def dilate(mask: BitMask, se: StructuringElement = StructuringElement()) -> BitMask:
    """Binary dilation; pixels outside the image are background."""
    src = mask.bits.astype(bool)
    out = np.zeros_like(src)
    r = se.radius
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            _shift_or(out, src, dy, dx)
    return BitMask(out)


def erode(mask: BitMask, se: StructuringElement = StructuringElement()) -> BitMask:
    """Binary erosion; the border erodes since outside counts as 0."""
    src = mask.bits.astype(bool)
    r = se.radius
    out = np.ones_like(src)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = np.zeros_like(src)
            _shift_or(shifted, src, dy, dx)
            out &= shifted
    return BitMask(out)


def close(mask: BitMask, se: StructuringElement = StructuringElement(), iterations: int = 1) -> BitMask:
    """Fill holes: ``iterations`` dilations followed by as many erosions.

    Computed on a zero-padded canvas so the dilation can spill past the
    image edge and the erosion reclaim it; the image border itself does
    not erode a saturated mask.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    pad = iterations * se.radius
    out = BitMask(np.pad(mask.bits, pad)) if pad else mask
    for _ in range(iterations):
        out = dilate(out, se)
    for _ in range(iterations):
        out = erode(out, se)
    bits = out.bits[pad:pad + mask.height, pad:pad + mask.width] if pad else out.bits
    return BitMask(bits)


class _UnionFind:
    def __init__(self):
        self.parent = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _row_runs(row: np.ndarray) -> list[tuple[int, int]]:
    # half-open [start, end) runs of set pixels in one row
    padded = np.empty(row.size + 2, dtype=np.int8)
    padded[0] = padded[-1] = 0
    padded[1:-1] = row
    edges = np.flatnonzero(np.diff(padded))
    return [(int(edges[i]), int(edges[i + 1])) for i in range(0, len(edges), 2)]


def connected_components(mask: BitMask) -> list[Component]:
    """Partition set bits into maximal 4-connected components.

    Label 1 is the largest by area; ties order by smaller min_x, then
    smaller min_y. Returns an empty list for an empty mask.
    """
    bits = mask.bits
    h, w = bits.shape
    uf = _UnionFind()
    prev_runs: list[tuple[int, int, int]] = []  # (start, end, set_id)
    all_runs: list[tuple[int, int, int, int]] = []  # (y, start, end, set_id)

    for y in range(h):
        cur: list[tuple[int, int, int]] = []
        j = 0
        for start, end in _row_runs(bits[y]):
            sid = -1
            # advance over previous-row runs that end before this one starts
            while j < len(prev_runs) and prev_runs[j][1] <= start:
                j += 1
            k = j
            while k < len(prev_runs) and prev_runs[k][0] < end:
                if sid == -1:
                    sid = prev_runs[k][2]
                else:
                    uf.union(sid, prev_runs[k][2])
                k += 1
            if sid == -1:
                sid = uf.make()
            cur.append((start, end, sid))
            all_runs.append((y, start, end, sid))
        prev_runs = cur

    groups: dict[int, list[tuple[int, int, int]]] = {}
    for y, start, end, sid in all_runs:
        groups.setdefault(uf.find(sid), []).append((y, start, end))

    raw = []
    for runs in groups.values():
        xs = np.concatenate([np.arange(s, e) for _, s, e in runs])
        ys = np.concatenate([np.full(e - s, y) for y, s, e in runs])
        order = np.lexsort((xs, ys))  # scan order: by y, then x
        pts = np.column_stack((xs[order], ys[order]))
        pts.flags.writeable = False
        bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
        centroid = (float(xs.mean()), float(ys.mean()))
        raw.append((len(xs), bbox, centroid, pts))

    raw.sort(key=lambda c: (-c[0], c[1][0], c[1][1]))
    return [
        Component(label=i + 1, area=area, bbox=bbox, centroid=centroid, pixels=pts)
        for i, (area, bbox, centroid, pts) in enumerate(raw)
    ]


def select_lung_components(comps: list[Component]) -> tuple[Component, Component]:
    """Keep the two largest components; lower centroid x is the left lung."""
    if len(comps) < 2:
        raise TooFewComponentsError(
            f"need at least 2 lung components, found {len(comps)}"
        )
    first, second = sorted(comps, key=lambda c: (-c.area, c.min_x, c.label))[:2]
    if first.centroid[0] <= second.centroid[0]:
        return first, second
    return second, first


def select_heart_component(
    comps: list[Component], img_w: int, img_h: int, min_area_frac: float = 0.01
) -> Component:
    """Largest-enough component closest to the image center."""
    if not 0.0 < min_area_frac < 1.0:
        raise ValueError("min_area_frac must lie in (0, 1)")
    min_area = min_area_frac * img_w * img_h
    qualified = [c for c in comps if c.area >= min_area]
    if not qualified:
        raise NoQualifyingComponentError(
            f"no component with area >= {min_area:.1f} px"
        )
    cx, cy = img_w / 2.0, img_h / 2.0
    return min(
        qualified,
        key=lambda c: ((c.centroid[0] - cx) ** 2 + (c.centroid[1] - cy) ** 2, c.label),
    )
