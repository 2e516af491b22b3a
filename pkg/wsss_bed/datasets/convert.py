"""
Dataset conversions: class-wise ground truth to class-agnostic saliency
(optionally restricted to a subset of classes, e.g. the VOC classes inside
COCO), and controlled degradation of saliency maps.
"""

from __future__ import annotations

from typing import FrozenSet, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..constants import BACKGROUND_LABEL, IGNORE_LABEL
from ..core_types import LabelMask, SaliencyMap
from ..errors import ClassCountMismatch, ValueOutOfRange


class ClassSubset(BaseModel):
    """Non-empty set of 0-based class indices below ``class_count``."""

    model_config = ConfigDict(frozen=True)

    kept: FrozenSet[int] = Field(min_length=1)
    class_count: int = Field(ge=1)

    @model_validator(mode="after")
    def _indices_in_range(self) -> "ClassSubset":
        out_of_range = sorted(k for k in self.kept if k < 0 or k >= self.class_count)
        if out_of_range:
            raise ValueError(
                f"class indices {out_of_range} outside 0..{self.class_count - 1}"
            )
        return self

    @classmethod
    def full(cls, class_count: int) -> "ClassSubset":
        return cls(kept=frozenset(range(class_count)), class_count=class_count)


def classwise_to_salient(gt: LabelMask, subset: ClassSubset) -> SaliencyMap:
    """Salient iff the pixel's class is in the subset; background and ignore are not salient."""
    if subset.class_count != gt.class_count:
        raise ClassCountMismatch(
            f"subset is for {subset.class_count} classes, mask has {gt.class_count}"
        )
    codes = np.array(sorted(k + 1 for k in subset.kept), dtype=np.uint8)
    values = gt.values
    salient = np.isin(values, codes) & (values != BACKGROUND_LABEL) & (values != IGNORE_LABEL)
    return SaliencyMap(salient.astype(np.float64), binarized=True)


def degrade_saliency(
    s: SaliencyMap, fraction: float, seed: Union[int, Sequence[int]] = 0
) -> SaliencyMap:
    """
    Turn ``round(fraction * n_salient)`` randomly chosen salient pixels of a
    binarized map into non-salient ones. Same seed, same pixels.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueOutOfRange(f"fraction must be in [0, 1], got {fraction}")
    salient = np.flatnonzero(s.salient())
    n_flip = int(round(fraction * salient.size))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(salient, size=n_flip, replace=False) if n_flip else salient[:0]
    values = s.values.copy().ravel()
    values[chosen] = 0.0
    return SaliencyMap(values.reshape(s.values.shape), binarized=True)
