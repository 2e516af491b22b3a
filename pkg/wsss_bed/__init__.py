"""
Benchmark harness for saliency-guided pseudo labels in weakly-supervised
semantic segmentation.
"""

from .core_types import (
    ActivationStack,
    ConfusionMatrix,
    ImageLabelVector,
    LabelMask,
    LogitVector,
    SaliencyMap,
    validate_pair,
)
from .fusion import FusionConfig, binarize_saliency, generate_pseudo_label

__all__ = [
    "ActivationStack",
    "ConfusionMatrix",
    "FusionConfig",
    "ImageLabelVector",
    "LabelMask",
    "LogitVector",
    "SaliencyMap",
    "binarize_saliency",
    "generate_pseudo_label",
    "validate_pair",
]
