"""
Dataset-level protocols: fuse and score a whole manifest, sweep the
activation threshold, cross every method with every saliency source, and the
dataset conversions exposed on the command line.

Images are processed in parallel (see ``parallel.map_ordered``); every
reduction merges per-image confusion matrices in manifest order, so results
do not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .constants import DEFAULT_SALIENCY_THRESHOLD, DEFAULT_SWEEP_GRID, MAX_SWEEP_POINTS
from .core_types import ActivationStack, ConfusionMatrix, ImageLabelVector, LabelMask, SaliencyMap
from .datasets import (
    ClassSubset,
    Manifest,
    ManifestEntry,
    actmap_path,
    classwise_to_salient,
    degrade_saliency,
    png_path,
    read_actmap,
    read_gray_png,
    read_label_png,
    write_gray_png,
    write_label_png,
)
from .errors import ClassCountMismatch, MissingThreshold, WsssBedError
from .fusion import FusionConfig, binarize_saliency, generate_pseudo_label, generate_threshold_label
from .metrics import MetricReport, SaliencyScore, accumulate, finalize, saliency_error
from .parallel import map_ordered

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class SweepGrid(BaseModel):
    """Threshold values start, start+step, ... up to and including stop."""

    model_config = ConfigDict(frozen=True)

    start: float = Field(ge=0.0, le=1.0)
    stop: float = Field(ge=0.0, le=1.0)
    step: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "SweepGrid":
        if self.start > self.stop:
            raise ValueError(f"grid start {self.start} is greater than stop {self.stop}")
        points = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
        if points > MAX_SWEEP_POINTS:
            raise ValueError(f"grid has {points} points; at most {MAX_SWEEP_POINTS} allowed")
        return self

    @classmethod
    def default(cls) -> "SweepGrid":
        start, stop, step = DEFAULT_SWEEP_GRID
        return cls(start=start, stop=stop, step=step)

    @classmethod
    def parse(cls, text: str) -> "SweepGrid":
        """Parse ``START:STOP:STEP``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like START:STOP:STEP, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"grid must look like START:STOP:STEP, got {text!r}") from exc
        return cls(start=start, stop=stop, step=step)

    def values(self) -> List[float]:
        # rounding keeps 0.05 + 7 * 0.05 at 0.4 instead of 0.40000000000000002
        count = math.floor((self.stop - self.start) / self.step + 1e-9)
        return [round(self.start + i * self.step, 10) for i in range(count + 1)]


@dataclass(frozen=True)
class SweepRow:
    tau: float
    miou: float
    per_class_iou: List[Optional[float]]
    ignored_fraction: float


@dataclass(frozen=True)
class SweepResult:
    rows: List[SweepRow]
    best_tau: float
    best_miou: float


@dataclass(frozen=True)
class CrossMatrix:
    method_names: List[str]
    saliency_names: List[str]
    miou: List[List[float]]

    def cell(self, method: str, saliency: str) -> float:
        return self.miou[self.method_names.index(method)][self.saliency_names.index(saliency)]


@dataclass(frozen=True)
class SaliencyReport:
    ids: List[str]
    scores: List[SaliencyScore]
    mean_mae: float
    mean_iou: float


@contextmanager
def _image_context(image_id: str) -> Iterator[None]:
    """Attach the image id to any pipeline error raised inside the block."""
    try:
        yield
    except WsssBedError as exc:
        if exc.image_id is None:
            exc.image_id = image_id
        raise


def _load_inputs(
    entry: ManifestEntry,
    actmap_root: PathLike,
    saliency_root: Optional[PathLike],
    saliency_threshold: float,
) -> Tuple[ActivationStack, Optional[SaliencyMap], ImageLabelVector]:
    a = read_actmap(actmap_path(actmap_root, entry.id))
    s = None
    if saliency_root is not None:
        soft = read_gray_png(png_path(saliency_root, entry.id))
        s = binarize_saliency(soft, saliency_threshold)
    y = entry.label_vector(a.class_count)
    return a, s, y


def _pseudo_label(
    a: ActivationStack, s: Optional[SaliencyMap], y: ImageLabelVector, tau: float
) -> LabelMask:
    if s is None:
        return generate_threshold_label(a, y, tau)
    return generate_pseudo_label(a, s, y, tau)


def _merge_in_order(
    manifest: Manifest, per_image: List[ConfusionMatrix]
) -> ConfusionMatrix:
    total = per_image[0]
    for entry, matrix in zip(manifest.entries[1:], per_image[1:]):
        with _image_context(entry.id):
            if matrix.class_count != total.class_count:
                raise ClassCountMismatch(
                    f"image has {matrix.class_count} classes, earlier images have "
                    f"{total.class_count}"
                )
            total = total.merge(matrix)
    return total


def _sweep_confusions(
    manifest: Manifest,
    actmap_root: PathLike,
    saliency_root: Optional[PathLike],
    gt_root: PathLike,
    taus: Sequence[float],
    saliency_threshold: float,
    jobs: Optional[int],
) -> List[ConfusionMatrix]:
    """One merged confusion matrix per tau; every image is loaded once."""
    if not len(manifest):
        raise WsssBedError("manifest has no entries")

    def per_image(entry: ManifestEntry) -> List[ConfusionMatrix]:
        with _image_context(entry.id):
            a, s, y = _load_inputs(entry, actmap_root, saliency_root, saliency_threshold)
            gt = read_label_png(png_path(gt_root, entry.id), a.class_count)
            empty = ConfusionMatrix.empty(a.class_count)
            return [accumulate(empty, _pseudo_label(a, s, y, tau), gt) for tau in taus]

    results = map_ordered(per_image, manifest.entries, jobs=jobs, desc="evaluating")
    return [
        _merge_in_order(manifest, [image[i] for image in results]) for i in range(len(taus))
    ]


def evaluate_dataset(
    manifest: Manifest,
    actmap_root: PathLike,
    saliency_root: Optional[PathLike],
    gt_root: PathLike,
    config: FusionConfig,
    jobs: Optional[int] = None,
) -> MetricReport:
    """
    Fuse every manifest image at ``config.tau`` and score the pseudo labels
    against ground truth. ``saliency_root=None`` selects saliency-free labelling.
    """
    logger.info(
        "Evaluating %d images at tau=%.6f (saliency threshold %.6f)",
        len(manifest), config.tau, config.saliency_threshold,
    )
    (confusion,) = _sweep_confusions(
        manifest, actmap_root, saliency_root, gt_root,
        [config.tau], config.saliency_threshold, jobs,
    )
    return finalize(confusion)


def sweep(
    manifest: Manifest,
    actmap_root: PathLike,
    saliency_root: Optional[PathLike],
    gt_root: PathLike,
    grid: SweepGrid,
    saliency_threshold: float = DEFAULT_SALIENCY_THRESHOLD,
    jobs: Optional[int] = None,
) -> SweepResult:
    """Evaluate every tau of the grid; the best tau is the smallest one reaching the top mIoU."""
    taus = grid.values()
    logger.info("Sweeping %d thresholds over %d images", len(taus), len(manifest))
    confusions = _sweep_confusions(
        manifest, actmap_root, saliency_root, gt_root, taus, saliency_threshold, jobs
    )

    rows: List[SweepRow] = []
    best: Optional[SweepRow] = None
    for tau, confusion in zip(taus, confusions):
        report = finalize(confusion)
        row = SweepRow(
            tau=tau,
            miou=report.miou,
            per_class_iou=report.per_class_iou,
            ignored_fraction=report.ignored_fraction,
        )
        rows.append(row)
        if best is None or row.miou > best.miou:
            best = row
        logger.debug("tau=%.6f miou=%.6f", tau, report.miou)

    return SweepResult(rows=rows, best_tau=best.tau, best_miou=best.miou)


def cross_matrix(
    methods: Dict[str, PathLike],
    saliencies: Dict[str, PathLike],
    manifest: Manifest,
    gt_root: PathLike,
    per_method_tau: Dict[str, float],
    saliency_threshold: float = DEFAULT_SALIENCY_THRESHOLD,
    jobs: Optional[int] = None,
) -> CrossMatrix:
    """mIoU of every (method, saliency source) pair, each method at its own tau."""
    missing = [name for name in methods if name not in per_method_tau]
    if missing:
        raise MissingThreshold(f"no tau given for methods: {', '.join(missing)}")

    grid: List[List[float]] = []
    for method, actmap_root in methods.items():
        config = FusionConfig(tau=per_method_tau[method], saliency_threshold=saliency_threshold)
        row = []
        for source, saliency_root in saliencies.items():
            logger.info("Cross cell method=%s saliency=%s", method, source)
            report = evaluate_dataset(
                manifest, actmap_root, saliency_root, gt_root, config, jobs=jobs
            )
            row.append(report.miou)
        grid.append(row)

    return CrossMatrix(
        method_names=list(methods), saliency_names=list(saliencies), miou=grid
    )


def fuse_dataset(
    manifest: Manifest,
    actmap_root: PathLike,
    saliency_root: Optional[PathLike],
    out_root: PathLike,
    config: FusionConfig,
    jobs: Optional[int] = None,
) -> int:
    """Write ``<out_root>/<id>.png`` pseudo labels; returns the number written."""
    out = Path(out_root)
    out.mkdir(parents=True, exist_ok=True)

    def per_image(entry: ManifestEntry) -> None:
        with _image_context(entry.id):
            a, s, y = _load_inputs(entry, actmap_root, saliency_root, config.saliency_threshold)
            label = _pseudo_label(a, s, y, config.tau)
            write_label_png(label, png_path(out, entry.id, must_exist=False))

    map_ordered(per_image, manifest.entries, jobs=jobs, desc="fusing")
    logger.info("Wrote %d pseudo labels to %s", len(manifest), out)
    return len(manifest)


def evaluate_predictions(
    manifest: Manifest,
    pred_root: PathLike,
    gt_root: PathLike,
    class_count: int,
    jobs: Optional[int] = None,
) -> MetricReport:
    """Score existing label PNGs against ground truth."""
    if not len(manifest):
        raise WsssBedError("manifest has no entries")

    def per_image(entry: ManifestEntry) -> ConfusionMatrix:
        with _image_context(entry.id):
            pred = read_label_png(png_path(pred_root, entry.id), class_count)
            gt = read_label_png(png_path(gt_root, entry.id), class_count)
            return accumulate(ConfusionMatrix.empty(class_count), pred, gt)

    per_image_confusions = map_ordered(per_image, manifest.entries, jobs=jobs, desc="scoring")
    return finalize(_merge_in_order(manifest, per_image_confusions))


def convert_saliency_dataset(
    manifest: Manifest,
    gt_root: PathLike,
    subset: ClassSubset,
    out_root: PathLike,
    jobs: Optional[int] = None,
) -> int:
    """Write class-agnostic saliency PNGs keeping only the subset's classes."""
    out = Path(out_root)
    out.mkdir(parents=True, exist_ok=True)

    def per_image(entry: ManifestEntry) -> None:
        with _image_context(entry.id):
            gt = read_label_png(png_path(gt_root, entry.id), subset.class_count)
            salient = classwise_to_salient(gt, subset)
            write_gray_png(salient, png_path(out, entry.id, must_exist=False))

    map_ordered(per_image, manifest.entries, jobs=jobs, desc="converting")
    return len(manifest)


def degrade_saliency_dataset(
    manifest: Manifest,
    saliency_root: PathLike,
    out_root: PathLike,
    fraction: float,
    seed: int = 0,
    saliency_threshold: float = DEFAULT_SALIENCY_THRESHOLD,
    jobs: Optional[int] = None,
) -> int:
    """Binarize each saliency map and drop ``fraction`` of its salient pixels."""
    out = Path(out_root)
    out.mkdir(parents=True, exist_ok=True)
    indexed = list(enumerate(manifest.entries))

    def per_image(item: Tuple[int, ManifestEntry]) -> None:
        index, entry = item
        with _image_context(entry.id):
            s = binarize_saliency(
                read_gray_png(png_path(saliency_root, entry.id)), saliency_threshold
            )
            degraded = degrade_saliency(s, fraction, seed=[seed, index])
            write_gray_png(degraded, png_path(out, entry.id, must_exist=False))

    map_ordered(per_image, indexed, jobs=jobs, desc="degrading")
    return len(manifest)


def evaluate_saliency_dataset(
    manifest: Manifest,
    saliency_root: PathLike,
    gt_root: PathLike,
    subset: ClassSubset,
    jobs: Optional[int] = None,
) -> SaliencyReport:
    """MAE / IoU of each saliency map against the subset-converted ground truth."""
    if not len(manifest):
        raise WsssBedError("manifest has no entries")

    def per_image(entry: ManifestEntry) -> SaliencyScore:
        with _image_context(entry.id):
            s = read_gray_png(png_path(saliency_root, entry.id))
            gt = read_label_png(png_path(gt_root, entry.id), subset.class_count)
            return saliency_error(s, classwise_to_salient(gt, subset))

    scores = map_ordered(per_image, manifest.entries, jobs=jobs, desc="saliency")
    return SaliencyReport(
        ids=manifest.ids,
        scores=scores,
        mean_mae=math.fsum(score.mae for score in scores) / len(scores),
        mean_iou=math.fsum(score.iou for score in scores) / len(scores),
    )
