"""
Reader and writer for the ``.actmap`` activation-stack container.

Layout (all little-endian): magic ``WBED``, u32 version, u32 C, u32 H, u32 W,
then C*H*W binary32 values, plane-major and row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..constants import MAX_CLASS_COUNT
from ..core_types import ActivationStack
from ..errors import BadHeader, BadMagic, BadVersion, TrailingData, TruncatedFile
from .constants import ACTMAP_MAGIC, ACTMAP_VERSION

_HEADER = struct.Struct("<4sIIII")
_VALUE_DTYPE = np.dtype("<f4")

PathLike = Union[str, Path]


def encode_actmap(a: ActivationStack) -> bytes:
    header = _HEADER.pack(ACTMAP_MAGIC, ACTMAP_VERSION, a.class_count, a.height, a.width)
    return header + a.planes.astype(_VALUE_DTYPE).tobytes(order="C")


def decode_actmap(data: bytes) -> ActivationStack:
    if len(data) < _HEADER.size:
        raise TruncatedFile(f"{len(data)} bytes is shorter than the {_HEADER.size}-byte header")
    magic, version, c, h, w = _HEADER.unpack_from(data)
    if magic != ACTMAP_MAGIC:
        raise BadMagic(f"expected magic {ACTMAP_MAGIC!r}, got {magic!r}")
    if version != ACTMAP_VERSION:
        raise BadVersion(f"unsupported actmap version {version}")
    if c == 0 or h == 0 or w == 0 or c > MAX_CLASS_COUNT:
        raise BadHeader(f"invalid dimensions C={c} H={h} W={w}")

    expected = _HEADER.size + c * h * w * _VALUE_DTYPE.itemsize
    if len(data) < expected:
        raise TruncatedFile(f"header claims {c}x{h}x{w} values but the payload is short")
    if len(data) > expected:
        raise TrailingData(f"{len(data) - expected} unexpected bytes after the payload")

    values = np.frombuffer(data, dtype=_VALUE_DTYPE, offset=_HEADER.size)
    return ActivationStack(values.reshape(c, h, w))


def write_actmap(a: ActivationStack, path: PathLike) -> None:
    Path(path).write_bytes(encode_actmap(a))


def read_actmap(path: PathLike) -> ActivationStack:
    return decode_actmap(Path(path).read_bytes())
