"""
Directory layout: ``<root>/<id>.actmap`` for activation stacks and
``<root>/<id>.png`` for saliency maps, ground truth and predictions.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

from ..errors import MissingFile
from .constants import ACTMAP_SUFFIX, PNG_SUFFIX

PathLike = Union[str, Path]


def image_path(root: PathLike, image_id: str, suffix: str, must_exist: bool = True) -> Path:
    path = Path(root) / f"{image_id}{suffix}"
    if must_exist and not path.is_file():
        raise MissingFile(f"missing file {path}", image_id=image_id)
    return path


def actmap_path(root: PathLike, image_id: str, must_exist: bool = True) -> Path:
    return image_path(root, image_id, ACTMAP_SUFFIX, must_exist)


def png_path(root: PathLike, image_id: str, must_exist: bool = True) -> Path:
    return image_path(root, image_id, PNG_SUFFIX, must_exist)
