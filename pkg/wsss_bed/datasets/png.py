"""
8-bit PNG I/O for saliency maps and label masks.

Saliency maps are single-channel grayscale (``L``); pixel v reads as v/255.
Label masks may be grayscale or palettized; palettized files are read by
palette index, never by colour. Label masks are written palettized with the
VOC colour map so they display like VOC ground truth and read back exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..core_types import LabelMask, SaliencyMap
from ..errors import UnreadableImage, UnsupportedPngFormat
from .constants import voc_palette

PathLike = Union[str, Path]

_PALETTE = voc_palette()


def _load_png(path: PathLike, allowed_modes: Tuple[str, ...]) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.format != "PNG":
                raise UnsupportedPngFormat(f"{path} is {img.format}, not PNG")
            if img.mode not in allowed_modes:
                raise UnsupportedPngFormat(
                    f"{path} has mode {img.mode}; expected one of {', '.join(allowed_modes)} "
                    "(8-bit, single channel)"
                )
            return np.array(img, dtype=np.uint8)
    except (UnidentifiedImageError, Image.DecompressionBombError, OSError, SyntaxError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise UnreadableImage(f"cannot decode {path}: {exc}") from exc


def read_gray_png(path: PathLike) -> SaliencyMap:
    pixels = _load_png(path, ("L",))
    return SaliencyMap(pixels / 255.0)


def write_gray_png(s: SaliencyMap, path: PathLike) -> None:
    pixels = np.rint(s.values * 255.0).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PNG")


def read_label_png(path: PathLike, class_count: int) -> LabelMask:
    return LabelMask(_load_png(path, ("L", "P")), class_count)


def write_label_png(mask: LabelMask, path: PathLike) -> None:
    img = Image.fromarray(np.array(mask.values))
    img.putpalette(_PALETTE)
    img.save(path, format="PNG")
