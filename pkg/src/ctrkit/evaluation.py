"""Segmentation metrics, detection statistics, and CTR summary tables.

Percentages everywhere are rounded half-away-from-zero to one decimal,
matching the printed style of the summary tables this module reproduces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BitMask, require_same_shape
from .errors import DegenerateDenominatorError

POSITIVE = "pos"
NEGATIVE = "neg"
UNKNOWN = "unknown"

CTR_BIN_EDGES = (0.40, 0.45, 0.50, 0.55, 0.60)
CTR_BIN_LABELS = ("<0.40", "0.40-0.45", "0.45-0.50", "0.50-0.55", "0.55-0.60", ">0.60")


def round_pct(fraction: float, decimals: int = 1) -> float:
    """100 * fraction rounded half-away-from-zero to ``decimals`` places."""
    scaled = fraction * 100.0 * 10**decimals
    return math.floor(abs(scaled) + 0.5) * math.copysign(1.0, scaled) / 10**decimals


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def add(self, predicted_positive: bool, labeled_positive: bool) -> "ConfusionMatrix":
        if predicted_positive and labeled_positive:
            return ConfusionMatrix(self.tp + 1, self.fp, self.tn, self.fn)
        if predicted_positive:
            return ConfusionMatrix(self.tp, self.fp + 1, self.tn, self.fn)
        if labeled_positive:
            return ConfusionMatrix(self.tp, self.fp, self.tn, self.fn + 1)
        return ConfusionMatrix(self.tp, self.fp, self.tn + 1, self.fn)


@dataclass(frozen=True)
class DetectionStats:
    """Ratios are None when their denominator is empty (absent, not 0)."""

    accuracy: float | None
    sensitivity: float | None
    specificity: float | None


def mask_metrics(pred: BitMask, truth: BitMask) -> tuple[float, float]:
    """(IoU, DSC) of two masks; two empty masks count as perfect (1, 1)."""
    require_same_shape(pred, truth, "masks")
    p = pred.bits.astype(bool)
    t = truth.bits.astype(bool)
    inter = int(np.count_nonzero(p & t))
    p_area = int(np.count_nonzero(p))
    t_area = int(np.count_nonzero(t))
    union = p_area + t_area - inter
    if union == 0:
        return 1.0, 1.0
    iou = inter / union
    dsc = 2.0 * inter / (p_area + t_area)
    return iou, dsc


def detection_stats(cm: ConfusionMatrix) -> DetectionStats:
    if cm.total < 1:
        raise DegenerateDenominatorError("confusion matrix is empty")
    acc = (cm.tp + cm.tn) / cm.total
    sens = cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) > 0 else None
    spec = cm.tn / (cm.tn + cm.fp) if (cm.tn + cm.fp) > 0 else None
    return DetectionStats(accuracy=acc, sensitivity=sens, specificity=spec)


def ctr_bin_index(ctr: float) -> int:
    """Bin index for a CTR value; bins are lower-inclusive, upper-exclusive."""
    for i, edge in enumerate(CTR_BIN_EDGES):
        if ctr < edge:
            return i
    return len(CTR_BIN_EDGES)


@dataclass(frozen=True)
class CtrHistogram:
    """Per-label bin counts plus percentages re-derived from the counts."""

    rows: dict[str, tuple[int, ...]]

    def percentages(self, label: str) -> tuple[float, ...]:
        counts = self.rows[label]
        total = sum(counts)
        if total == 0:
            return tuple(0.0 for _ in counts)
        return tuple(round_pct(c / total) for c in counts)

    def total(self, label: str) -> int:
        return sum(self.rows[label])


def ctr_distribution(cases: list[tuple[float, str]]) -> CtrHistogram:
    """Histogram of CTR values split by dataset label (Pos/Neg rows)."""
    rows: dict[str, list[int]] = {}
    for ctr, label in cases:
        bins = rows.setdefault(label, [0] * len(CTR_BIN_LABELS))
        bins[ctr_bin_index(ctr)] += 1
    return CtrHistogram(rows={k: tuple(v) for k, v in rows.items()})


@dataclass(frozen=True)
class MismatchRow:
    label: str
    below_cutoff: int
    at_or_above: int
    errors_pct: float

    @property
    def total(self) -> int:
        return self.below_cutoff + self.at_or_above


@dataclass(frozen=True)
class MismatchReport:
    rows: tuple[MismatchRow, ...]
    average_pct: float | None


def _mismatch_rate(label: str, below: int, at_or_above: int) -> float:
    # a positive label disagrees when CTR fell below the cutoff, and vice versa
    total = below + at_or_above
    mism = below if label == POSITIVE else at_or_above
    return mism / total


def mismatch_analysis(cases: list[tuple[float, str]], cutoff: float = 0.5) -> MismatchReport:
    """Dataset-label disagreement table.

    Per label: the share of cases whose CTR landed on the wrong side of the
    cutoff. The average row is the unweighted mean of the per-label rates,
    matching the printed tables this reproduces.
    """
    counts: dict[str, list[int]] = {}
    for ctr, label in cases:
        if label == UNKNOWN:
            continue
        pair = counts.setdefault(label, [0, 0])
        if ctr < cutoff:
            pair[0] += 1
        else:
            pair[1] += 1

    rows = []
    rates = []
    for label in (POSITIVE, NEGATIVE):
        if label not in counts:
            continue
        below, above = counts[label]
        rate = _mismatch_rate(label, below, above)
        rates.append(rate)
        rows.append(
            MismatchRow(
                label=label,
                below_cutoff=below,
                at_or_above=above,
                errors_pct=round_pct(rate),
            )
        )
    average = round_pct(sum(rates) / len(rates)) if rates else None
    return MismatchReport(rows=tuple(rows), average_pct=average)
