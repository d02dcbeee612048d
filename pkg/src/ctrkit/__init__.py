"""Cardiothoracic ratio measurement toolkit.

Segments heart and lung masks from chest X-ray style grayscale images
(toy trained model or supplied mask files), post-processes them, measures
MRD/MLD/ID from mask extents, derives the CTR, classifies cardiomegaly at
a 0.5 cutoff, and serves a human review workflow.
"""

from .core import BitMask, GrayImage, Point, Segment, extreme_points
from .ctr import (
    CARDIOMEGALY,
    MILD,
    NORMAL,
    CtrThresholds,
    Measurement,
    classify,
    measure_ctr,
    scale_measurement,
)
from .evaluation import (
    ConfusionMatrix,
    CtrHistogram,
    ctr_distribution,
    detection_stats,
    mask_metrics,
    mismatch_analysis,
)
from .imgproc import AugmentConfig, augment_sample, equalize_histogram, resize, resize_mask
from .morphology import (
    Component,
    StructuringElement,
    close,
    connected_components,
    dilate,
    erode,
    select_heart_component,
    select_lung_components,
)
from .pipeline import CaseRecord, PipelineConfig, parse_manifest, run_pipeline
from .segmentation import FileMasks, SegmentationResult, ToyModelBackend, load_mask_file
from .synthetic import generate_synthetic_dataset

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig",
    "BitMask",
    "CARDIOMEGALY",
    "CaseRecord",
    "Component",
    "ConfusionMatrix",
    "CtrHistogram",
    "CtrThresholds",
    "FileMasks",
    "GrayImage",
    "MILD",
    "Measurement",
    "NORMAL",
    "PipelineConfig",
    "Point",
    "Segment",
    "SegmentationResult",
    "StructuringElement",
    "ToyModelBackend",
    "augment_sample",
    "classify",
    "close",
    "connected_components",
    "ctr_distribution",
    "detection_stats",
    "dilate",
    "equalize_histogram",
    "erode",
    "extreme_points",
    "generate_synthetic_dataset",
    "load_mask_file",
    "mask_metrics",
    "measure_ctr",
    "mismatch_analysis",
    "parse_manifest",
    "resize",
    "resize_mask",
    "run_pipeline",
    "scale_measurement",
    "select_heart_component",
    "select_lung_components",
]
