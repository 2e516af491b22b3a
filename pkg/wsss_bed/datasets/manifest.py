"""
JSON-Lines manifests: one ``{"id": ..., "labels": [...]}`` object per line.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterator, List, Optional, Union

from pydantic import BaseModel, ConfigDict, StrictInt, StrictStr, ValidationError

from ..core_types import ImageLabelVector
from ..errors import DuplicateId, LabelOutOfRange, ParseError

PathLike = Union[str, Path]

logger = logging.getLogger(__name__)


class ManifestEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: StrictStr
    labels: List[StrictInt]

    def label_vector(self, class_count: int) -> ImageLabelVector:
        for label in self.labels:
            if label < 0 or label >= class_count:
                raise LabelOutOfRange(
                    f"label {label} out of range (class count {class_count})", image_id=self.id
                )
        return ImageLabelVector.from_indices(self.labels, class_count)


class Manifest:
    """Ordered, id-unique list of manifest entries."""

    def __init__(self, entries: List[ManifestEntry], class_count: Optional[int] = None) -> None:
        seen = set()
        for entry in entries:
            if entry.id in seen:
                raise DuplicateId(f"duplicate image id {entry.id!r}", image_id=entry.id)
            seen.add(entry.id)
            for label in entry.labels:
                if label < 0 or (class_count is not None and label >= class_count):
                    bound = "" if class_count is None else f" (class count {class_count})"
                    raise LabelOutOfRange(
                        f"label {label} out of range{bound}", image_id=entry.id
                    )
        self.entries = list(entries)

    @property
    def ids(self) -> List[str]:
        return [entry.id for entry in self.entries]

    def __iter__(self) -> Iterator[ManifestEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def read_manifest(path: PathLike, class_count: Optional[int] = None) -> Manifest:
    entries: List[ManifestEntry] = []
    seen = set()
    with open(path, "rb") as f:
        for line_no, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"invalid UTF-8: {exc.reason}", line=line_no) from exc
            if not line.strip():
                continue
            try:
                entry = ManifestEntry.model_validate_json(line)
            except ValidationError as exc:
                first = exc.errors()[0]
                where = ".".join(str(part) for part in first.get("loc", ())) or "line"
                raise ParseError(f"{where}: {first.get('msg')}", line=line_no) from exc
            if entry.id in seen:
                raise DuplicateId(
                    f"line {line_no}: duplicate image id {entry.id!r}", image_id=entry.id
                )
            seen.add(entry.id)
            entries.append(entry)
    logger.debug("Read %d manifest entries from %s", len(entries), path)
    return Manifest(entries, class_count=class_count)


def write_manifest(manifest: Manifest, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for entry in manifest:
            f.write(json.dumps({"id": entry.id, "labels": list(entry.labels)}) + "\n")
