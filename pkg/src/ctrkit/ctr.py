"""Cardiothoracic ratio geometry and cardiomegaly classification.

All diameters are horizontal x-extents. The thoracic diameter ID spans the
outermost lung pixels; the midline is the vertical through the midpoint of
the ID segment; MRD/MLD are the midline-to-heart-edge distances whose sum
is exactly the heart's x-extent, and CTR = (MRD + MLD) / ID.
"""

from __future__ import annotations

from dataclasses import dataclass, field


from .core import Point, Segment
from .errors import EmptyComponentError, ZeroDimensionError, ZeroThoracicWidthError
from .morphology import Component

NORMAL = "Normal"
MILD = "Mild"
CARDIOMEGALY = "Cardiomegaly"
_CATEGORY_ORDER = {NORMAL: 0, MILD: 1, CARDIOMEGALY: 2}

FLAG_NEGATIVE_MRD = "NegativeMRD"
FLAG_NEGATIVE_MLD = "NegativeMLD"


@dataclass(frozen=True)
class CtrThresholds:
    """Detection cutoff and the upper bound of the mild band."""

    cutoff: float = 0.50
    mild_upper: float = 0.55

    def __post_init__(self):
        if not 0.0 < self.cutoff < self.mild_upper < 1.0:
            raise ValueError("require 0 < cutoff < mild_upper < 1")


@dataclass(frozen=True)
class Measurement:
    """MRD/MLD/ID segments with signed lengths and the derived CTR."""

    mrd: Segment
    mld: Segment
    id: Segment
    mrd_len: float
    mld_len: float
    id_len: float
    midline_x: float
    ctr: float
    category: str
    detection: bool
    flags: frozenset[str] = field(default_factory=frozenset)


def classify(ctr: float, th: CtrThresholds = CtrThresholds()) -> tuple[str, bool]:
    """Return (category, detection). The cutoff itself counts as positive."""
    if ctr < 0:
        raise ValueError("ctr must be >= 0")
    if ctr < th.cutoff:
        return NORMAL, False
    if ctr <= th.mild_upper:
        return MILD, True
    return CARDIOMEGALY, True


def category_rank(category: str) -> int:
    return _CATEGORY_ORDER[category]


def _leftmost(comp: Component) -> tuple[int, int]:
    # (x, y) of the leftmost pixel; ties resolve to the topmost
    xs = comp.pixels[:, 0]
    at = comp.pixels[xs == xs.min()]
    return int(at[:, 0].min()), int(at[:, 1].min())


def _rightmost(comp: Component) -> tuple[int, int]:
    xs = comp.pixels[:, 0]
    at = comp.pixels[xs == xs.max()]
    return int(at[:, 0].max()), int(at[:, 1].min())


def measure_ctr(
    heart: Component,
    left_lung: Component,
    right_lung: Component,
    th: CtrThresholds = CtrThresholds(),
) -> Measurement:
    """Measure MRD, MLD, ID and CTR from selected components.

    A heart lying entirely on one side of the midline makes one of
    MRD/MLD negative; that is flagged, never clamped, so the identity
    MRD + MLD = heart x-extent stays exact.
    """
    for name, comp in (("heart", heart), ("left lung", left_lung), ("right lung", right_lung)):
        if comp.area < 1 or len(comp.pixels) == 0:
            raise EmptyComponentError(f"{name} component is empty")

    lung_candidates = [
        _leftmost(left_lung), _leftmost(right_lung),
        _rightmost(left_lung), _rightmost(right_lung),
    ]
    lung_left = min(lung_candidates, key=lambda p: (p[0], p[1]))
    lung_right = max(lung_candidates, key=lambda p: (p[0], -p[1]))
    id_len = float(lung_right[0] - lung_left[0])
    if id_len <= 0:
        raise ZeroThoracicWidthError("lung extent has zero width")

    heart_left = _leftmost(heart)
    heart_right = _rightmost(heart)
    midline_x = (lung_left[0] + lung_right[0]) / 2.0

    mrd_len = midline_x - heart_left[0]
    mld_len = heart_right[0] - midline_x
    ctr = (mrd_len + mld_len) / id_len

    flags = set()
    if mrd_len < 0:
        flags.add(FLAG_NEGATIVE_MRD)
    if mld_len < 0:
        flags.add(FLAG_NEGATIVE_MLD)

    category, detection = classify(max(ctr, 0.0), th)

    id_seg = Segment(Point(*lung_left), Point(*lung_right))
    mrd_seg = Segment(
        Point(heart_left[0], heart_left[1]), Point(midline_x, heart_left[1])
    )
    mld_seg = Segment(
        Point(midline_x, heart_right[1]), Point(heart_right[0], heart_right[1])
    )
    return Measurement(
        mrd=mrd_seg,
        mld=mld_seg,
        id=id_seg,
        mrd_len=mrd_len,
        mld_len=mld_len,
        id_len=id_len,
        midline_x=midline_x,
        ctr=ctr,
        category=category,
        detection=detection,
        flags=frozenset(flags),
    )


def _scale_point(p: Point, sx: float, sy: float) -> Point:
    return Point(p.x * sx, p.y * sy)


def _scale_segment(s: Segment, sx: float, sy: float) -> Segment:
    return Segment(_scale_point(s.a, sx, sy), _scale_point(s.b, sx, sy))


def scale_measurement(
    m: Measurement, from_dims: tuple[int, int], to_dims: tuple[int, int]
) -> Measurement:
    """Map a measurement between pixel spaces (e.g. model to display).

    Dimensions are (width, height). Lengths scale with the x-axis ratio;
    CTR is a ratio of x-extents, so it is unchanged.
    """
    fw, fh = from_dims
    tw, th_ = to_dims
    if min(fw, fh, tw, th_) < 1:
        raise ZeroDimensionError("dimensions must be >= 1")
    sx = tw / fw
    sy = th_ / fh
    mrd_len = m.mrd_len * sx
    mld_len = m.mld_len * sx
    id_len = m.id_len * sx
    return Measurement(
        mrd=_scale_segment(m.mrd, sx, sy),
        mld=_scale_segment(m.mld, sx, sy),
        id=_scale_segment(m.id, sx, sy),
        mrd_len=mrd_len,
        mld_len=mld_len,
        id_len=id_len,
        midline_x=m.midline_x * sx,
        ctr=(mrd_len + mld_len) / id_len,
        category=m.category,
        detection=m.detection,
        flags=m.flags,
    )
