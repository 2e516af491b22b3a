"""
Command-line front end.

Exit codes: 0 success, 1 usage error (bad flags or parameter values), 2 data
or runtime error (missing files, malformed inputs). Progress and logs go to
stderr; result lines go to stdout.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, TypeVar

from pydantic import ValidationError

from .constants import DEBUG_ENV_VAR, DEFAULT_SALIENCY_THRESHOLD
from .datasets import ClassSubset, read_manifest
from .datasets.constants import COCO_CLASS_COUNT, COCO_VOC_SUBSET, VOC_CLASS_COUNT
from .errors import WsssBedError
from .experiments import (
    SweepGrid,
    convert_saliency_dataset,
    cross_matrix,
    degrade_saliency_dataset,
    evaluate_predictions,
    evaluate_saliency_dataset,
    fuse_dataset,
    sweep,
)
from .fusion import FusionConfig
from .parallel import default_jobs
from .reports import format_real, write_report
from .synthetic import STYLES, write_fixture

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

T = TypeVar("T")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so usage errors map to exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: error: {message}")


def _configure_logging() -> None:
    debug_enabled = os.getenv(DEBUG_ENV_VAR, "false").lower() == "true"
    logging.basicConfig(
        level=logging.DEBUG if debug_enabled else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        stream=sys.stderr,
    )


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _named(text: str, convert: Callable[[str], T]) -> Dict[str, T]:
    """Parse ``name=value,name=value`` keeping the given order."""
    result: Dict[str, T] = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name or not value:
            raise argparse.ArgumentTypeError(f"expected name=value pairs, got {item!r}")
        if name in result:
            raise argparse.ArgumentTypeError(f"name {name!r} given twice")
        try:
            result[name] = convert(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad value for {name!r}: {value!r}")
    return result


def _named_paths(text: str) -> Dict[str, Path]:
    return _named(text, Path)


def _named_reals(text: str) -> Dict[str, float]:
    return _named(text, float)


def _validated(build: Callable[[], T], what: str) -> T:
    """Build a config object, turning validation failures into usage errors."""
    try:
        return build()
    except (ValidationError, ValueError) as exc:
        raise UsageError(f"invalid {what}: {exc}") from exc


def _check_saliency_thresh(value: float) -> None:
    if not 0.0 < value < 1.0:
        raise UsageError(f"--saliency-thresh must be in (0, 1), got {value}")


def _class_subset(text: str, class_count: int) -> ClassSubset:
    """``all``, ``voc`` (VOC classes inside 80-class COCO) or a comma list of indices."""
    choice = text.strip().lower()
    if choice == "all":
        return _validated(lambda: ClassSubset.full(class_count), "--keep-classes")
    if choice == "voc":
        if class_count != COCO_CLASS_COUNT:
            raise UsageError(f"--keep-classes voc needs --classes {COCO_CLASS_COUNT}")
        kept = list(COCO_VOC_SUBSET)
    else:
        items = [item.strip() for item in choice.split(",") if item.strip()]
        if not items:
            raise UsageError("--keep-classes must name at least one class")
        try:
            kept = [int(item) for item in items]
        except ValueError:
            raise UsageError(f"--keep-classes expects integers, 'all' or 'voc', got {text!r}")
    return _validated(
        lambda: ClassSubset(kept=frozenset(kept), class_count=class_count), "--keep-classes"
    )


def cmd_fuse(args: argparse.Namespace) -> int:
    config = _validated(
        lambda: FusionConfig(tau=args.tau, saliency_threshold=args.saliency_thresh),
        "fusion parameters",
    )
    manifest = read_manifest(args.manifest)
    count = fuse_dataset(
        manifest, args.actmaps, args.saliency, args.out, config, jobs=args.jobs
    )
    print(f"processed={count}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = _validated(lambda: SweepGrid.parse(args.grid), "--grid")
    _check_saliency_thresh(args.saliency_thresh)
    manifest = read_manifest(args.manifest)
    result = sweep(
        manifest, args.actmaps, args.saliency, args.gt, grid,
        saliency_threshold=args.saliency_thresh, jobs=args.jobs,
    )
    write_report(result, args.out)
    print(f"best_tau={format_real(result.best_tau)} best_miou={format_real(result.best_miou)}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest, class_count=args.classes)
    report = evaluate_predictions(manifest, args.pred, args.gt, args.classes, jobs=args.jobs)
    write_report(report, args.out)
    print(f"miou={format_real(report.miou)}")
    return EXIT_OK


def cmd_convert_saliency(args: argparse.Namespace) -> int:
    subset = _class_subset(args.keep_classes, args.classes)
    manifest = read_manifest(args.manifest)
    count = convert_saliency_dataset(manifest, args.gt, subset, args.out, jobs=args.jobs)
    print(f"processed={count}")
    return EXIT_OK


def cmd_cross(args: argparse.Namespace) -> int:
    missing = [name for name in args.methods if name not in args.taus]
    if missing:
        raise UsageError(f"--taus has no entry for: {', '.join(missing)}")
    for name, tau in args.taus.items():
        _validated(
            lambda: FusionConfig(tau=tau, saliency_threshold=args.saliency_thresh),
            f"tau for {name}",
        )
    manifest = read_manifest(args.manifest)
    matrix = cross_matrix(
        args.methods, args.saliencies, manifest, args.gt, args.taus,
        saliency_threshold=args.saliency_thresh, jobs=args.jobs,
    )
    write_report(matrix, args.out)
    return EXIT_OK


def cmd_eval_saliency(args: argparse.Namespace) -> int:
    subset = _class_subset(args.keep_classes, args.classes)
    manifest = read_manifest(args.manifest)
    report = evaluate_saliency_dataset(manifest, args.saliency, args.gt, subset, jobs=args.jobs)
    write_report(report, args.out)
    print(f"mean_mae={format_real(report.mean_mae)} mean_iou={format_real(report.mean_iou)}")
    return EXIT_OK


def cmd_degrade_saliency(args: argparse.Namespace) -> int:
    if not 0.0 <= args.fraction <= 1.0:
        raise UsageError(f"--fraction must be in [0, 1], got {args.fraction}")
    _check_saliency_thresh(args.saliency_thresh)
    manifest = read_manifest(args.manifest)
    count = degrade_saliency_dataset(
        manifest, args.saliency, args.out, args.fraction,
        seed=args.seed, saliency_threshold=args.saliency_thresh, jobs=args.jobs,
    )
    print(f"processed={count}")
    return EXIT_OK


def cmd_make_fixture(args: argparse.Namespace) -> int:
    try:
        paths = write_fixture(
            args.out, args.count, style=args.style, height=args.height,
            width=args.width, class_count=args.classes, seed=args.seed,
        )
    except WsssBedError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"manifest={paths.manifest}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", type=Path, required=True, help="JSON-Lines manifest")
    parser.add_argument(
        "--jobs", type=_positive_int, default=default_jobs(),
        help="worker threads (default: available CPUs); results do not depend on it",
    )


def _add_saliency_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--saliency", type=Path, help="directory of <id>.png saliency maps")
    group.add_argument(
        "--saliency-free", action="store_true",
        help="label from activation thresholds alone, without saliency maps",
    )


def _add_saliency_thresh(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--saliency-thresh", type=float, default=DEFAULT_SALIENCY_THRESHOLD,
        help=f"inclusive binarization cutoff for soft saliency (default {DEFAULT_SALIENCY_THRESHOLD})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wsss-bed",
        description="Pseudo-label generation and evaluation from activation and saliency maps.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("fuse", help="write pseudo labels for every manifest image")
    p.add_argument("--actmaps", type=Path, required=True, help="directory of <id>.actmap files")
    _add_saliency_source(p)
    _add_common(p)
    p.add_argument("--tau", type=float, required=True, help="activation threshold in [0, 1]")
    p.add_argument("--out", type=Path, required=True, help="output directory for <id>.png")
    _add_saliency_thresh(p)
    p.set_defaults(handler=cmd_fuse)

    p = sub.add_parser("sweep", help="evaluate pseudo labels over a grid of thresholds")
    p.add_argument("--actmaps", type=Path, required=True, help="directory of <id>.actmap files")
    _add_saliency_source(p)
    _add_common(p)
    p.add_argument("--gt", type=Path, required=True, help="directory of ground-truth <id>.png")
    p.add_argument("--grid", default="0.05:0.95:0.05", help="START:STOP:STEP (default 0.05:0.95:0.05)")
    p.add_argument("--out", type=Path, required=True, help="CSV report path")
    _add_saliency_thresh(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("eval", help="score existing label PNGs against ground truth")
    p.add_argument("--pred", type=Path, required=True, help="directory of predicted <id>.png")
    p.add_argument("--gt", type=Path, required=True, help="directory of ground-truth <id>.png")
    _add_common(p)
    p.add_argument("--classes", type=_positive_int, required=True, help="number of foreground classes")
    p.add_argument("--out", type=Path, required=True, help="CSV report path")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("convert-saliency", help="class-wise ground truth to binary saliency")
    p.add_argument("--gt", type=Path, required=True, help="directory of ground-truth <id>.png")
    _add_common(p)
    p.add_argument(
        "--keep-classes", required=True,
        help="comma list of 0-based class indices, 'all', or 'voc' (with --classes 80)",
    )
    p.add_argument(
        "--classes", type=_positive_int, default=VOC_CLASS_COUNT,
        help=f"number of classes in the ground truth (default {VOC_CLASS_COUNT})",
    )
    p.add_argument("--out", type=Path, required=True, help="output directory for <id>.png")
    p.set_defaults(handler=cmd_convert_saliency)

    p = sub.add_parser("cross", help="mIoU of every method with every saliency source")
    p.add_argument("--methods", type=_named_paths, required=True, help="name=DIR,... activation roots")
    p.add_argument("--saliencies", type=_named_paths, required=True, help="name=DIR,... saliency roots")
    p.add_argument("--taus", type=_named_reals, required=True, help="name=R,... tau per method")
    _add_common(p)
    p.add_argument("--gt", type=Path, required=True, help="directory of ground-truth <id>.png")
    p.add_argument("--out", type=Path, required=True, help="CSV report path")
    _add_saliency_thresh(p)
    p.set_defaults(handler=cmd_cross)

    p = sub.add_parser("eval-saliency", help="MAE / IoU of saliency maps against ground truth")
    p.add_argument("--saliency", type=Path, required=True, help="directory of <id>.png saliency maps")
    p.add_argument("--gt", type=Path, required=True, help="directory of ground-truth <id>.png")
    _add_common(p)
    p.add_argument("--keep-classes", default="all", help="classes counted as salient (default all)")
    p.add_argument(
        "--classes", type=_positive_int, default=VOC_CLASS_COUNT,
        help=f"number of classes in the ground truth (default {VOC_CLASS_COUNT})",
    )
    p.add_argument("--out", type=Path, required=True, help="CSV report path")
    p.set_defaults(handler=cmd_eval_saliency)

    p = sub.add_parser("degrade-saliency", help="drop a fraction of salient pixels per map")
    p.add_argument("--saliency", type=Path, required=True, help="directory of <id>.png saliency maps")
    _add_common(p)
    p.add_argument("--fraction", type=float, required=True, help="fraction of salient pixels to drop")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", type=Path, required=True, help="output directory for <id>.png")
    _add_saliency_thresh(p)
    p.set_defaults(handler=cmd_degrade_saliency)

    p = sub.add_parser("make-fixture", help="write a synthetic dataset")
    p.add_argument("--out", type=Path, required=True, help="fixture root directory")
    p.add_argument("--count", type=_positive_int, default=20, help="number of images (default 20)")
    p.add_argument("--style", choices=STYLES, default="sparse", help="activation style")
    p.add_argument("--height", type=_positive_int, default=24)
    p.add_argument("--width", type=_positive_int, default=24)
    p.add_argument("--classes", type=_positive_int, default=5, help="number of classes (default 5)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_make_fixture)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    _configure_logging()
    logger.debug("Running %s with %s", args.command, vars(args))
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WsssBedError, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run() -> None:
    sys.exit(main())
