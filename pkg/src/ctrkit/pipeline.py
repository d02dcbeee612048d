"""Batch orchestration: manifest in, per-case measurements and reports out.

Per-case failures (too few lung components, no qualifying heart component,
degenerate lung extent) are recorded as ``unmeasurable`` results with a
reason; they never abort the batch.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import imageio
from .core import GrayImage
from .ctr import CtrThresholds, Measurement, measure_ctr
from .errors import (
    DuplicateCaseIdError,
    MalformedManifestError,
    UnmeasurableCaseError,
)
from .evaluation import (
    CTR_BIN_LABELS,
    NEGATIVE,
    POSITIVE,
    UNKNOWN,
    ConfusionMatrix,
    ctr_distribution,
    detection_stats,
    mismatch_analysis,
)
from .morphology import (
    StructuringElement,
    close,
    connected_components,
    select_heart_component,
    select_lung_components,
)
from .segmentation import FileMasks, SegmentationResult, ToyModelBackend

MANIFEST_COLUMNS = ["case_id", "image", "heart_mask", "lung_mask", "label"]
VALID_LABELS = {POSITIVE, NEGATIVE, UNKNOWN}

STATUS_MEASURED = "measured"
STATUS_UNMEASURABLE = "unmeasurable"


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    image_path: str
    heart_mask_path: str | None = None
    lung_mask_path: str | None = None
    dataset_label: str = UNKNOWN


@dataclass(frozen=True)
class PipelineConfig:
    backend: str = "files"  # "files" | "model"
    heart_model: str | None = None
    lung_model: str | None = None
    se_side: int = 3
    close_iterations: int = 2
    heart_min_area_frac: float = 0.01
    cutoff: float = 0.50
    mild_upper: float = 0.55
    model_threshold: float = 0.5
    out_dir: str = "out"
    parallelism: int = 1
    overlays: bool = True

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def thresholds(self) -> CtrThresholds:
        return CtrThresholds(cutoff=self.cutoff, mild_upper=self.mild_upper)


@dataclass
class CaseResult:
    case_id: str
    status: str
    dataset_label: str = UNKNOWN
    measurement: Measurement | None = None
    reason: str | None = None
    segmentation: SegmentationResult | None = field(default=None, repr=False)


def parse_manifest(path) -> list[CaseRecord]:
    """Read the case index CSV; paths are resolved against its directory."""
    base = os.path.dirname(os.path.abspath(path))
    records: list[CaseRecord] = []
    seen: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedManifestError("empty manifest", line=1) from None
        if [h.strip() for h in header] != MANIFEST_COLUMNS:
            raise MalformedManifestError(
                f"header must be {','.join(MANIFEST_COLUMNS)}", line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(MANIFEST_COLUMNS):
                raise MalformedManifestError(
                    f"expected {len(MANIFEST_COLUMNS)} columns, got {len(row)}",
                    line=lineno,
                )
            case_id, image, heart, lung, label = (cell.strip() for cell in row)
            if not case_id:
                raise MalformedManifestError("empty case_id", line=lineno)
            if not image:
                raise MalformedManifestError("empty image path", line=lineno)
            if label not in VALID_LABELS:
                raise MalformedManifestError(
                    f"label must be one of pos|neg|unknown, got {label!r}", line=lineno
                )
            if case_id in seen:
                raise DuplicateCaseIdError(
                    f"case_id {case_id!r} already used on line {seen[case_id]}",
                    line=lineno,
                )
            seen[case_id] = lineno
            records.append(
                CaseRecord(
                    case_id=case_id,
                    image_path=os.path.join(base, image),
                    heart_mask_path=os.path.join(base, heart) if heart else None,
                    lung_mask_path=os.path.join(base, lung) if lung else None,
                    dataset_label=label,
                )
            )
    return records


def build_backend(cfg: PipelineConfig):
    if cfg.backend == "files":
        return FileMasks()
    if cfg.backend == "model":
        if not cfg.heart_model or not cfg.lung_model:
            raise ValueError("model backend requires heart_model and lung_model paths")
        return ToyModelBackend.from_files(
            cfg.heart_model, cfg.lung_model, threshold=cfg.model_threshold
        )
    raise ValueError(f"unknown backend {cfg.backend!r}")


def _segment_case(backend, case: CaseRecord, image: GrayImage) -> SegmentationResult:
    if isinstance(backend, FileMasks):
        return backend.segment(image, case.heart_mask_path, case.lung_mask_path)
    return backend.segment(image)


def measure_case(
    seg: SegmentationResult, image: GrayImage, cfg: PipelineConfig
) -> Measurement:
    """Post-process masks and measure: close, label, select, measure."""
    se = StructuringElement(cfg.se_side)
    heart_mask = close(seg.heart, se, iterations=cfg.close_iterations)
    lung_mask = close(seg.lungs, se, iterations=cfg.close_iterations)
    lung_comps = connected_components(lung_mask)
    left, right = select_lung_components(lung_comps)
    heart_comps = connected_components(heart_mask)
    heart = select_heart_component(
        heart_comps, image.width, image.height, cfg.heart_min_area_frac
    )
    return measure_ctr(heart, left, right, th=cfg.thresholds())


def run_case(backend, case: CaseRecord, cfg: PipelineConfig) -> CaseResult:
    image = imageio.read_image(case.image_path)
    try:
        seg = _segment_case(backend, case, image)
        m = measure_case(seg, image, cfg)
    except UnmeasurableCaseError as exc:
        return CaseResult(
            case_id=case.case_id,
            status=STATUS_UNMEASURABLE,
            dataset_label=case.dataset_label,
            reason=exc.reason,
        )
    return CaseResult(
        case_id=case.case_id,
        status=STATUS_MEASURED,
        dataset_label=case.dataset_label,
        measurement=m,
        segmentation=seg,
    )


def _point_obj(p) -> dict:
    return {"x": p.x, "y": p.y}


def _segment_obj(s) -> dict:
    return {"a": _point_obj(s.a), "b": _point_obj(s.b)}


def result_to_obj(r: CaseResult) -> dict:
    obj: dict = {"case_id": r.case_id, "status": r.status}
    if r.status == STATUS_MEASURED:
        m = r.measurement
        obj.update(
            {
                "ctr": m.ctr,
                "mrd_px": m.mrd_len,
                "mld_px": m.mld_len,
                "id_px": m.id_len,
                "midline_x": m.midline_x,
                "category": m.category,
                "detection": m.detection,
                "flags": sorted(m.flags),
                "endpoints": {
                    "mrd": _segment_obj(m.mrd),
                    "mld": _segment_obj(m.mld),
                    "id": _segment_obj(m.id),
                },
            }
        )
    else:
        obj["reason"] = r.reason
    return obj


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_overlay(path, image: GrayImage, m: Measurement) -> None:
    """Render the three measurement segments and the CTR onto the image."""
    from PIL import Image, ImageDraw

    im = Image.fromarray(image.pixels, mode="L").convert("RGB")
    draw = ImageDraw.Draw(im)
    lw = max(1, image.width // 256)

    def line(seg, color):
        draw.line(
            [(seg.a.x, seg.a.y), (seg.b.x, seg.b.y)], fill=color, width=lw
        )
        r = 2 * lw
        for p in (seg.a, seg.b):
            draw.ellipse([p.x - r, p.y - r, p.x + r, p.y + r], outline=color, width=lw)

    line(m.id, (220, 40, 40))
    line(m.mrd, (40, 90, 230))
    line(m.mld, (40, 170, 60))
    draw.text((4, 4), f"CTR={m.ctr:.3f} {m.category}", fill=(255, 230, 40))
    im.save(path)


def run_pipeline(cfg: PipelineConfig, cases: list[CaseRecord]) -> list[CaseResult]:
    """Process every case, write per-case JSON plus overlays, and report."""
    backend = build_backend(cfg)
    out_dir = os.fspath(cfg.out_dir)
    cases_dir = os.path.join(out_dir, "cases")
    overlays_dir = os.path.join(out_dir, "overlays")
    os.makedirs(cases_dir, exist_ok=True)
    if cfg.overlays:
        os.makedirs(overlays_dir, exist_ok=True)

    def process(case: CaseRecord) -> CaseResult:
        return run_case(backend, case, cfg)

    if cfg.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            results = list(pool.map(process, cases))
    else:
        results = [process(c) for c in cases]

    for case, result in zip(cases, results):
        _dump_json(result_to_obj(result), os.path.join(cases_dir, f"{result.case_id}.json"))
        if cfg.overlays and result.status == STATUS_MEASURED:
            image = imageio.read_image(case.image_path)
            write_overlay(
                os.path.join(overlays_dir, f"{result.case_id}.png"),
                image,
                result.measurement,
            )

    emit_report(results, out_dir, cutoff=cfg.cutoff)
    return results


def _confusion(results: list[CaseResult]) -> ConfusionMatrix:
    cm = ConfusionMatrix()
    for r in results:
        if r.status != STATUS_MEASURED or r.dataset_label == UNKNOWN:
            continue
        cm = cm.add(r.measurement.detection, r.dataset_label == POSITIVE)
    return cm


def summarize(results: list[CaseResult], cutoff: float = 0.5) -> dict:
    """All report tables as one JSON-serializable object (timestamp-free)."""
    measured = [r for r in results if r.status == STATUS_MEASURED]
    labeled = [
        (r.measurement.ctr, r.dataset_label)
        for r in measured
        if r.dataset_label != UNKNOWN
    ]
    cm = _confusion(results)
    detection = None
    if cm.total >= 1:
        stats = detection_stats(cm)
        detection = {
            "tp": cm.tp,
            "fp": cm.fp,
            "tn": cm.tn,
            "fn": cm.fn,
            "accuracy": stats.accuracy,
            "sensitivity": stats.sensitivity,
            "specificity": stats.specificity,
        }
    hist = ctr_distribution(labeled)
    distribution = {
        label: {
            "counts": list(hist.rows[label]),
            "percentages": list(hist.percentages(label)),
        }
        for label in sorted(hist.rows)
    }
    mismatch = mismatch_analysis(labeled, cutoff=cutoff)
    return {
        "cases": {
            "total": len(results),
            "measured": len(measured),
            "unmeasurable": len(results) - len(measured),
        },
        "detection": detection,
        "distribution": {"bins": list(CTR_BIN_LABELS), "rows": distribution},
        "mismatch": {
            "rows": [
                {
                    "label": row.label,
                    "ctr_below_cutoff": row.below_cutoff,
                    "ctr_at_or_above": row.at_or_above,
                    "errors_pct": row.errors_pct,
                }
                for row in mismatch.rows
            ],
            "average_pct": mismatch.average_pct,
        },
        "unmeasurable": [
            {"case_id": r.case_id, "reason": r.reason}
            for r in results
            if r.status == STATUS_UNMEASURABLE
        ],
    }


def emit_report(results: list[CaseResult], out_dir, cutoff: float = 0.5) -> dict:
    """Write summary.json / summary.csv / distribution.csv / mismatch.csv."""
    os.makedirs(out_dir, exist_ok=True)
    summary = summarize(results, cutoff=cutoff)
    summary_with_ts = dict(summary)
    summary_with_ts["generated_at"] = datetime.now(timezone.utc).isoformat()
    paths = {
        "summary_json": os.path.join(out_dir, "summary.json"),
        "summary_csv": os.path.join(out_dir, "summary.csv"),
        "distribution_csv": os.path.join(out_dir, "distribution.csv"),
        "mismatch_csv": os.path.join(out_dir, "mismatch.csv"),
    }
    _dump_json(summary_with_ts, paths["summary_json"])

    with open(paths["summary_csv"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["case_id", "status", "label", "ctr", "category", "detection", "reason"]
        )
        for r in results:
            if r.status == STATUS_MEASURED:
                m = r.measurement
                writer.writerow(
                    [r.case_id, r.status, r.dataset_label, repr(m.ctr),
                     m.category, str(m.detection).lower(), ""]
                )
            else:
                writer.writerow(
                    [r.case_id, r.status, r.dataset_label, "", "", "", r.reason]
                )

    with open(paths["distribution_csv"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + list(CTR_BIN_LABELS) + ["total"])
        for label, row in summary["distribution"]["rows"].items():
            writer.writerow([label] + [str(p) for p in row["percentages"]]
                            + [str(sum(row["counts"]))])

    with open(paths["mismatch_csv"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "ctr_below_cutoff", "ctr_at_or_above", "errors_pct"])
        for row in summary["mismatch"]["rows"]:
            writer.writerow(
                [row["label"], row["ctr_below_cutoff"], row["ctr_at_or_above"],
                 row["errors_pct"]]
            )
        avg = summary["mismatch"]["average_pct"]
        if avg is not None:
            writer.writerow(["average", "", "", avg])
    return paths
