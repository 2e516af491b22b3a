"""
Domain values shared by every stage of the pipeline: activation stacks,
saliency maps, label masks, image-level labels, logits and confusion
matrices.

Every type validates itself on construction and stores its pixels in a
read-only numpy array, so instances can be handed to worker threads
without copying. Pixel layout is plane-major, then row, then column.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .constants import IGNORE_LABEL, MAX_CLASS_COUNT
from .errors import (
    ClassCountMismatch,
    DimensionMismatch,
    InvalidLabelValue,
    NonFinite,
    NotBinarized,
    ValueOutOfRange,
)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _check_unit_interval(arr: np.ndarray, what: str) -> None:
    if not np.isfinite(arr).all():
        raise NonFinite(f"{what} contains NaN or infinite values")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueOutOfRange(
            f"{what} values must lie in [0, 1], got [{arr.min()}, {arr.max()}]"
        )


def _check_class_count(class_count: int) -> None:
    if class_count < 1 or class_count > MAX_CLASS_COUNT:
        raise ValueOutOfRange(
            f"class_count must be in 1..{MAX_CLASS_COUNT}, got {class_count}"
        )


class ActivationStack:
    """
    Per-image class activation planes, shape (C, H, W), values in [0, 1].
    """

    def __init__(self, planes: Iterable) -> None:
        arr = np.array(planes, dtype=np.float64)
        if arr.ndim != 3 or 0 in arr.shape:
            raise DimensionMismatch(
                f"activation stack must be a non-empty C x H x W array, got shape {arr.shape}"
            )
        _check_class_count(arr.shape[0])
        _check_unit_interval(arr, "activation stack")
        self._planes = _frozen(arr)

    @property
    def planes(self) -> np.ndarray:
        return self._planes

    @property
    def class_count(self) -> int:
        return self._planes.shape[0]

    @property
    def height(self) -> int:
        return self._planes.shape[1]

    @property
    def width(self) -> int:
        return self._planes.shape[2]

    def __repr__(self) -> str:
        return f"ActivationStack(C={self.class_count}, H={self.height}, W={self.width})"


class SaliencyMap:
    """
    H x W saliency. Soft maps hold any value in [0, 1]; binarized maps hold
    exactly 0.0 or 1.0.
    """

    def __init__(self, values: Iterable, binarized: bool = False) -> None:
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2 or 0 in arr.shape:
            raise DimensionMismatch(
                f"saliency map must be a non-empty H x W array, got shape {arr.shape}"
            )
        _check_unit_interval(arr, "saliency map")
        if binarized and not np.isin(arr, (0.0, 1.0)).all():
            raise NotBinarized("binarized saliency map holds values other than 0 and 1")
        self._values = _frozen(arr)
        self.binarized = bool(binarized)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def height(self) -> int:
        return self._values.shape[0]

    @property
    def width(self) -> int:
        return self._values.shape[1]

    def salient(self) -> np.ndarray:
        """Boolean salient region of a binarized map."""
        if not self.binarized:
            raise NotBinarized("salient region is only defined for binarized maps")
        return self._values == 1.0


class LabelMask:
    """
    H x W label codes: 0 background, 1..C classes (class index + 1), 255 ignore.
    """

    def __init__(self, values: Iterable, class_count: int) -> None:
        _check_class_count(class_count)
        raw = np.asarray(values)
        if raw.ndim != 2 or 0 in raw.shape:
            raise DimensionMismatch(
                f"label mask must be a non-empty H x W array, got shape {raw.shape}"
            )
        if raw.dtype != np.uint8:
            if not np.issubdtype(raw.dtype, np.integer):
                raise InvalidLabelValue(f"label mask must hold integers, got {raw.dtype}")
            if raw.size and (raw.min() < 0 or raw.max() > IGNORE_LABEL):
                raise InvalidLabelValue("label mask values must fit in 0..255")
        arr = np.array(raw, dtype=np.uint8)
        bad = (arr > class_count) & (arr != IGNORE_LABEL)
        if bad.any():
            offending = sorted(set(np.unique(arr[bad]).tolist()))
            raise InvalidLabelValue(
                f"label values {offending} are outside 0..{class_count} and not {IGNORE_LABEL}"
            )
        self._values = _frozen(arr)
        self.class_count = int(class_count)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def height(self) -> int:
        return self._values.shape[0]

    @property
    def width(self) -> int:
        return self._values.shape[1]


class ImageLabelVector:
    """Image-level presence flags, one per class."""

    def __init__(self, flags: Iterable) -> None:
        arr = np.array(flags, dtype=bool)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatch(
                f"image label vector must be a non-empty 1-D array, got shape {arr.shape}"
            )
        self._flags = _frozen(arr)

    @classmethod
    def from_indices(cls, indices: Iterable[int], class_count: int) -> ImageLabelVector:
        flags = np.zeros(class_count, dtype=bool)
        for idx in indices:
            if idx < 0 or idx >= class_count:
                raise ValueOutOfRange(f"class index {idx} outside 0..{class_count - 1}")
            flags[idx] = True
        return cls(flags)

    @property
    def flags(self) -> np.ndarray:
        return self._flags

    def __len__(self) -> int:
        return self._flags.size


class LogitVector:
    """Pre-sigmoid classifier scores, one per class."""

    def __init__(self, values: Iterable) -> None:
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatch(
                f"logit vector must be a non-empty 1-D array, got shape {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise NonFinite("logit vector contains NaN or infinite values")
        self._values = _frozen(arr)

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size


class ConfusionMatrix:
    """
    (C+1) x (C+1) pixel counts. Rows are ground truth, columns are
    predictions, index 0 is background. Ignored pixels are tallied apart.
    """

    def __init__(
        self,
        class_count: int,
        counts: Optional[Iterable] = None,
        ignored_pixels: int = 0,
    ) -> None:
        _check_class_count(class_count)
        size = class_count + 1
        if counts is None:
            arr = np.zeros((size, size), dtype=np.int64)
        else:
            arr = np.array(counts, dtype=np.int64)
        if arr.shape != (size, size):
            raise DimensionMismatch(
                f"confusion counts must be {size} x {size}, got shape {arr.shape}"
            )
        if (arr < 0).any() or ignored_pixels < 0:
            raise ValueOutOfRange("confusion counts must be non-negative")
        self.class_count = int(class_count)
        self._counts = _frozen(arr)
        self.ignored_pixels = int(ignored_pixels)

    @classmethod
    def empty(cls, class_count: int) -> ConfusionMatrix:
        return cls(class_count)

    @property
    def counts(self) -> np.ndarray:
        return self._counts

    @property
    def total_pixels(self) -> int:
        return int(self._counts.sum()) + self.ignored_pixels

    def merge(self, other: ConfusionMatrix) -> ConfusionMatrix:
        """Element-wise sum; commutative and associative."""
        if other.class_count != self.class_count:
            raise ClassCountMismatch(
                f"cannot merge matrices with {self.class_count} and {other.class_count} classes"
            )
        return ConfusionMatrix(
            self.class_count,
            self._counts + other._counts,
            self.ignored_pixels + other.ignored_pixels,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return (
            self.class_count == other.class_count
            and self.ignored_pixels == other.ignored_pixels
            and np.array_equal(self._counts, other._counts)
        )

    def __repr__(self) -> str:
        return (
            f"ConfusionMatrix(C={self.class_count}, pixels={int(self._counts.sum())}, "
            f"ignored={self.ignored_pixels})"
        )


def validate_pair(a: ActivationStack, s: SaliencyMap, y: ImageLabelVector) -> None:
    """
    Check that an activation stack, its saliency map and its image labels
    describe the same image. Value-range invariants are enforced when the
    values are constructed, so only shapes are compared here.
    """
    if (a.height, a.width) != (s.height, s.width):
        raise DimensionMismatch(
            f"activation stack is {a.height}x{a.width} but saliency map is {s.height}x{s.width}"
        )
    if a.class_count != len(y):
        raise DimensionMismatch(
            f"activation stack has {a.class_count} classes but label vector has {len(y)}"
        )
