"""
Pseudo-label generation from activation maps and saliency maps.

Per pixel, the background cue is ``1 - S`` and each valid class cue is the
activation if it exceeds ``tau`` (else 0). The label is the argmax over
``[bg, fg_1 .. fg_C]`` with ties going to the lowest index, and salient pixels
that still land on background are ignored (255).
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .constants import DEFAULT_SALIENCY_THRESHOLD, IGNORE_LABEL
from .core_types import (
    ActivationStack,
    ImageLabelVector,
    LabelMask,
    SaliencyMap,
    validate_pair,
)
from .errors import DimensionMismatch, NotBinarized, ThresholdOutOfRange


class FusionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau: float = Field(ge=0.0, le=1.0)
    saliency_threshold: float = Field(default=DEFAULT_SALIENCY_THRESHOLD, gt=0.0, lt=1.0)


def binarize_saliency(s: SaliencyMap, threshold: float) -> SaliencyMap:
    """Inclusive cutoff: 1.0 where s >= threshold, else 0.0."""
    if not 0.0 < threshold <= 1.0:
        raise ThresholdOutOfRange(f"saliency threshold must be in (0, 1], got {threshold}")
    binary = (s.values >= threshold).astype(np.float64)
    return SaliencyMap(binary, binarized=True)


def _class_cues(a: ActivationStack, y: ImageLabelVector, tau: float) -> tuple:
    """
    Return (best_code, best_value): the winning class code (1..C) and its cue
    value per pixel. Cues are zero for absent classes and for activations not
    strictly above tau. np.argmax keeps the first maximum, i.e. lowest index.
    """
    valid = (a.planes > tau) & y.flags[:, None, None]
    cues = np.where(valid, a.planes, 0.0)
    best = cues.argmax(axis=0)
    best_value = np.take_along_axis(cues, best[None], axis=0)[0]
    return best + 1, best_value


def generate_pseudo_label(
    a: ActivationStack,
    s: SaliencyMap,
    y: ImageLabelVector,
    tau: float,
) -> LabelMask:
    """
    Fuse one image's activation stack with its binarized saliency map.
    Soft saliency is rejected; binarize it first with an explicit cutoff.
    """
    validate_pair(a, s, y)
    if not s.binarized:
        raise NotBinarized("saliency map must be binarized before fusion")

    background = 1.0 - s.values
    best_code, best_value = _class_cues(a, y, tau)

    # bg wins ties, so a class only takes the pixel with a strictly larger cue
    codes = np.where(best_value > background, best_code, 0).astype(np.uint8)
    codes[(s.values == 1.0) & (codes == 0)] = IGNORE_LABEL
    return LabelMask(codes, a.class_count)


def generate_threshold_label(a: ActivationStack, y: ImageLabelVector, tau: float) -> LabelMask:
    """
    Saliency-free pseudo label: a pixel takes the strongest valid class whose
    activation exceeds tau, otherwise background. No pixel is ignored.
    """
    if a.class_count != len(y):
        raise DimensionMismatch(
            f"activation stack has {a.class_count} classes but label vector has {len(y)}"
        )
    best_code, best_value = _class_cues(a, y, tau)
    codes = np.where(best_value > 0.0, best_code, 0).astype(np.uint8)
    return LabelMask(codes, a.class_count)
