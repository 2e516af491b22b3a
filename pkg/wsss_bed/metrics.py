"""
Confusion-matrix accumulation and the scores derived from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .constants import DEFAULT_SALIENCY_THRESHOLD, IGNORE_LABEL
from .core_types import ConfusionMatrix, LabelMask, SaliencyMap
from .errors import ClassCountMismatch, DimensionMismatch, NoValidClasses, NotBinarized
from .fusion import binarize_saliency


@dataclass(frozen=True)
class MetricReport:
    """Per-class lists are indexed by label code (0 = background); None marks an absent class."""

    per_class_iou: List[Optional[float]]
    miou: float
    pixel_accuracy: float
    per_class_precision: List[Optional[float]]
    per_class_recall: List[Optional[float]]
    ignored_fraction: float

    @property
    def class_count(self) -> int:
        return len(self.per_class_iou) - 1


@dataclass(frozen=True)
class SaliencyScore:
    mae: float
    iou: float


def accumulate(m: ConfusionMatrix, pred: LabelMask, gt: LabelMask) -> ConfusionMatrix:
    """Add one prediction / ground-truth pair. Pixels ignored in either mask are tallied apart."""
    if pred.values.shape != gt.values.shape:
        raise DimensionMismatch(
            f"prediction is {pred.height}x{pred.width} but ground truth is {gt.height}x{gt.width}"
        )
    if not pred.class_count == gt.class_count == m.class_count:
        raise ClassCountMismatch(
            f"class counts differ: prediction {pred.class_count}, ground truth "
            f"{gt.class_count}, matrix {m.class_count}"
        )
    size = m.class_count + 1
    p = pred.values.ravel()
    g = gt.values.ravel()
    valid = (g != IGNORE_LABEL) & (p != IGNORE_LABEL)
    index = g[valid].astype(np.int64) * size + p[valid]
    counts = np.bincount(index, minlength=size * size).reshape(size, size)
    ignored = int(p.size - np.count_nonzero(valid))
    return m.merge(ConfusionMatrix(m.class_count, counts, ignored))


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    if denominator == 0:
        return None
    return numerator / denominator


def finalize(m: ConfusionMatrix) -> MetricReport:
    """
    Turn accumulated counts into IoU / precision / recall per class. Classes
    with zero union are reported as None and left out of the mean.
    """
    counts = m.counts
    diag = np.diag(counts).tolist()
    rows = counts.sum(axis=1).tolist()
    cols = counts.sum(axis=0).tolist()

    iou = [_ratio(d, r + c - d) for d, r, c in zip(diag, rows, cols)]
    present = [v for v in iou if v is not None]
    if not present:
        raise NoValidClasses("no class has a non-empty union; nothing to score")

    total = int(counts.sum())
    return MetricReport(
        per_class_iou=iou,
        miou=math.fsum(present) / len(present),
        pixel_accuracy=sum(diag) / total,
        per_class_precision=[_ratio(d, c) for d, c in zip(diag, cols)],
        per_class_recall=[_ratio(d, r) for d, r in zip(diag, rows)],
        ignored_fraction=m.ignored_pixels / m.total_pixels,
    )


def saliency_error(s: SaliencyMap, gt: SaliencyMap) -> SaliencyScore:
    """
    Mean absolute error of the raw map and IoU of its 0.5-binarized salient
    region against a binary ground truth. Two empty regions score IoU 1.
    """
    if (s.height, s.width) != (gt.height, gt.width):
        raise DimensionMismatch(
            f"saliency map is {s.height}x{s.width} but ground truth is {gt.height}x{gt.width}"
        )
    if not gt.binarized:
        raise NotBinarized("saliency ground truth must be binarized")
    mae = float(np.abs(s.values - gt.values).mean())
    pred = binarize_saliency(s, DEFAULT_SALIENCY_THRESHOLD).salient()
    truth = gt.salient()
    union = int(np.count_nonzero(pred | truth))
    inter = int(np.count_nonzero(pred & truth))
    return SaliencyScore(mae=mae, iou=1.0 if union == 0 else inter / union)
