"""
Deterministic synthetic datasets for tests and profiling.

Every image holds two rectangular objects of different classes side by side,
an accurate saliency map covering exactly those objects, and an activation
stack in one of two styles:

- ``sparse``: CAM-like. Object pixels carry weak evidence (0.12 to 0.45) around
  a small peak, and evidence spills onto the surrounding background where the
  saliency map filters it out. Low thresholds keep the most correct pixels.
- ``saturated``: object pixels carry strong evidence (0.6 to 1.0), but a band
  of each object next to its neighbour has no own-class evidence and
  mid-level (0.36 to 0.39) evidence for the neighbour's class. Thresholds
  of 0.4 and above drop that band.

Both styles add a small patch inside each object where the neighbour's class
dominates at 0.97, and noise for one absent class that the image-level labels
must mask out.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from .core_types import ActivationStack, LabelMask, SaliencyMap
from .datasets import (
    Manifest,
    ManifestEntry,
    actmap_path,
    png_path,
    write_actmap,
    write_gray_png,
    write_label_png,
    write_manifest,
)

PathLike = Union[str, Path]

logger = logging.getLogger(__name__)
Rect = Tuple[int, int, int, int]  # row start, row stop, col start, col stop

STYLES = ("sparse", "saturated")


@dataclass(frozen=True)
class SyntheticImage:
    image_id: str
    labels: List[int]
    activations: ActivationStack
    saliency: SaliencyMap
    ground_truth: LabelMask


@dataclass(frozen=True)
class FixturePaths:
    root: Path
    manifest: Path
    actmaps: Path
    saliency: Path
    gt: Path


def _object_rects(rng: np.random.Generator, height: int, width: int) -> Tuple[Rect, Rect]:
    jitter = max(1, height // 20)
    rects = []
    for col_start, col_stop in ((0.08, 0.45), (0.55, 0.92)):
        top = max(0, int(height * 0.15) + int(rng.integers(-jitter, jitter + 1)))
        bottom = min(height, int(height * 0.85) + int(rng.integers(-jitter, jitter + 1)))
        rects.append((top, bottom, int(width * col_start), int(width * col_stop)))
    return rects[0], rects[1]


def _region(rect: Rect) -> Tuple[slice, slice]:
    r0, r1, c0, c1 = rect
    return slice(r0, r1), slice(c0, c1)


def _spill_ring(rect: Rect, height: int, width: int, background: np.ndarray) -> np.ndarray:
    margin = max(1, width // 12)
    r0, r1, c0, c1 = rect
    ring = np.zeros((height, width), dtype=bool)
    ring[max(0, r0 - margin):min(height, r1 + margin), max(0, c0 - margin):min(width, c1 + margin)] = True
    ring[_region(rect)] = False
    return ring & background


def _paint_object(
    planes: np.ndarray,
    rng: np.random.Generator,
    style: str,
    rect: Rect,
    own: int,
    other: int,
    neighbour_on_right: bool,
    background: np.ndarray,
) -> None:
    r0, r1, c0, c1 = rect
    h, w = r1 - r0, c1 - c0
    rows, cols = _region(rect)
    _, height, width = planes.shape

    if style == "sparse":
        planes[own, rows, cols] = rng.uniform(0.12, 0.45, size=(h, w))
        spill = (0.1, 0.5)
    else:
        planes[own, rows, cols] = rng.uniform(0.6, 1.0, size=(h, w))
        spill = (0.5, 0.9)
        band = max(1, w // 4)
        band_cols = slice(c1 - band, c1) if neighbour_on_right else slice(c0, c0 + band)
        planes[own, rows, band_cols] = 0.0
        planes[other, rows, band_cols] = rng.uniform(0.36, 0.39, size=(h, band))

    ring = _spill_ring(rect, height, width, background)
    planes[own][ring] = rng.uniform(*spill, size=int(ring.sum()))

    ph, pw = max(1, h // 4), max(1, w // 4)
    pr = r0 + (h - ph) // 2
    pc = c0 + (w - pw) // 2
    planes[own, pr:pr + ph, pc:pc + pw] = 1.0

    # neighbour-class patch on the side away from the neighbour
    qh, qw = max(1, h // 8), max(1, w // 8)
    qc = c0 if neighbour_on_right else c1 - qw
    planes[own, r0:r0 + qh, qc:qc + qw] = 0.5
    planes[other, r0:r0 + qh, qc:qc + qw] = 0.97


def make_image(
    index: int,
    style: str = "sparse",
    height: int = 24,
    width: int = 24,
    class_count: int = 5,
    seed: int = 0,
) -> SyntheticImage:
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}; expected one of {STYLES}")
    if class_count < 3:
        raise ValueError("synthetic scenes need at least 3 classes")
    if height < 16 or width < 16:
        raise ValueError("synthetic scenes need at least 16x16 pixels")

    rng = np.random.default_rng([seed, index])
    left_cls, right_cls, absent_cls = (int(k) for k in rng.choice(class_count, 3, replace=False))
    left, right = _object_rects(rng, height, width)

    gt = np.zeros((height, width), dtype=np.uint8)
    gt[_region(left)] = left_cls + 1
    gt[_region(right)] = right_cls + 1
    background = gt == 0

    planes = np.zeros((class_count, height, width), dtype=np.float64)
    planes[absent_cls] = rng.uniform(0.0, 0.9, size=(height, width))
    _paint_object(planes, rng, style, left, left_cls, right_cls, True, background)
    _paint_object(planes, rng, style, right, right_cls, left_cls, False, background)

    # round through binary32 so the in-memory stack matches what .actmap stores
    planes = planes.astype(np.float32).astype(np.float64)

    return SyntheticImage(
        image_id=f"img_{index:04d}",
        labels=sorted((left_cls, right_cls)),
        activations=ActivationStack(planes),
        saliency=SaliencyMap((~background).astype(np.float64), binarized=True),
        ground_truth=LabelMask(gt, class_count),
    )


def write_fixture(
    root: PathLike,
    count: int,
    style: str = "sparse",
    height: int = 24,
    width: int = 24,
    class_count: int = 5,
    seed: int = 0,
) -> FixturePaths:
    """Write ``manifest.jsonl`` plus ``actmaps/``, ``saliency/`` and ``gt/`` under root."""
    base = Path(root)
    paths = FixturePaths(
        root=base,
        manifest=base / "manifest.jsonl",
        actmaps=base / "actmaps",
        saliency=base / "saliency",
        gt=base / "gt",
    )
    for directory in (paths.actmaps, paths.saliency, paths.gt):
        directory.mkdir(parents=True, exist_ok=True)

    entries = []
    for index in range(count):
        image = make_image(index, style, height, width, class_count, seed)
        write_actmap(image.activations, actmap_path(paths.actmaps, image.image_id, must_exist=False))
        write_gray_png(image.saliency, png_path(paths.saliency, image.image_id, must_exist=False))
        write_label_png(image.ground_truth, png_path(paths.gt, image.image_id, must_exist=False))
        entries.append(ManifestEntry(id=image.image_id, labels=image.labels))
    write_manifest(Manifest(entries, class_count=class_count), paths.manifest)
    logger.info(
        "Wrote %d %s images (%dx%d, %d classes) to %s",
        count, style, height, width, class_count, base,
    )
    return paths
