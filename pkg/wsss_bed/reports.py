"""
CSV reports. Reals are fixed-notation with six decimals, absent values are
empty fields, lines end with ``\\n`` and files are UTF-8, so repeated runs on
the same inputs produce identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Optional, Sequence, Union

from .constants import REPORT_DECIMALS
from .experiments import CrossMatrix, SaliencyReport, SweepResult
from .metrics import MetricReport

PathLike = Union[str, Path]
Report = Union[SweepResult, CrossMatrix, MetricReport, SaliencyReport]


def format_real(value: Optional[float]) -> str:
    if value is None:
        return ""
    return f"{value:.{REPORT_DECIMALS}f}"


def _indexed(prefix: str, count: int) -> List[str]:
    return [f"{prefix}_{k}" for k in range(count)]


def _reals(values: Sequence[Optional[float]]) -> List[str]:
    return [format_real(v) for v in values]


def _sweep_rows(result: SweepResult) -> List[List[str]]:
    width = len(result.rows[0].per_class_iou)
    rows = [["tau", "miou", "ignored_fraction", *_indexed("iou", width)]]
    for row in result.rows:
        rows.append(
            [format_real(row.tau), format_real(row.miou), format_real(row.ignored_fraction),
             *_reals(row.per_class_iou)]
        )
    return rows


def _cross_rows(matrix: CrossMatrix) -> List[List[str]]:
    rows = [["method", *matrix.saliency_names]]
    for method, values in zip(matrix.method_names, matrix.miou):
        rows.append([method, *_reals(values)])
    return rows


def _metric_rows(report: MetricReport) -> List[List[str]]:
    width = len(report.per_class_iou)
    header = [
        "miou", "pixel_accuracy", "ignored_fraction",
        *_indexed("iou", width), *_indexed("precision", width), *_indexed("recall", width),
    ]
    values = [
        format_real(report.miou), format_real(report.pixel_accuracy),
        format_real(report.ignored_fraction),
        *_reals(report.per_class_iou), *_reals(report.per_class_precision),
        *_reals(report.per_class_recall),
    ]
    return [header, values]


def _saliency_rows(report: SaliencyReport) -> List[List[str]]:
    rows = [["id", "mae", "iou"]]
    for image_id, score in zip(report.ids, report.scores):
        rows.append([image_id, format_real(score.mae), format_real(score.iou)])
    rows.append(["mean", format_real(report.mean_mae), format_real(report.mean_iou)])
    return rows


def report_rows(result: Report) -> List[List[str]]:
    if isinstance(result, SweepResult):
        return _sweep_rows(result)
    if isinstance(result, CrossMatrix):
        return _cross_rows(result)
    if isinstance(result, MetricReport):
        return _metric_rows(result)
    if isinstance(result, SaliencyReport):
        return _saliency_rows(result)
    raise TypeError(f"no CSV layout for {type(result).__name__}")


def write_report(result: Report, path: PathLike) -> None:
    rows = report_rows(result)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerows(rows)
