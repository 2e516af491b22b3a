"""
Classifier-side formulas used as verifiable primitives: CAM normalisation of
last-layer feature maps and the multi-label binary cross-entropy. Nothing here
trains anything.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .core_types import ActivationStack, ImageLabelVector, LogitVector
from .errors import DimensionMismatch, LengthMismatch, NonFinite


class FeatureStack:
    """Raw C x H x W feature maps of any sign."""

    def __init__(self, values: Iterable) -> None:
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 3 or 0 in arr.shape:
            raise DimensionMismatch(
                f"feature stack must be a non-empty C x H x W array, got shape {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise NonFinite("feature stack contains NaN or infinite values")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def class_count(self) -> int:
        return self._values.shape[0]


def normalize_cam(f: FeatureStack) -> ActivationStack:
    """
    ReLU then divide each channel by its own spatial maximum. Channels with no
    positive value become all-zero planes.
    """
    relu = np.maximum(f.values, 0.0)
    peaks = relu.max(axis=(1, 2), keepdims=True)
    planes = np.zeros_like(relu)
    np.divide(relu, peaks, out=planes, where=peaks > 0.0)
    return ActivationStack(planes)


def global_average_pool(f: FeatureStack) -> LogitVector:
    """Per-channel arithmetic mean of the feature maps."""
    return LogitVector(f.values.mean(axis=(1, 2)))


def bce_loss(z: LogitVector, y: ImageLabelVector) -> float:
    """
    Mean multi-label binary cross-entropy over classes.

    Each term is softplus(-z) for a present class and softplus(z) for an
    absent one, which equals -log(sigmoid) / -log(1 - sigmoid) without
    overflowing for large |z|.
    """
    if len(z) != len(y):
        raise LengthMismatch(f"{len(z)} logits but {len(y)} labels")
    signed = np.where(y.flags, -z.values, z.values)
    terms = np.logaddexp(0.0, signed)
    return float(terms.mean())
