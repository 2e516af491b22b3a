"""
Exception hierarchy shared by every module. All errors derive from ValueError
so callers that only know about bad-input ValueErrors keep working.
"""

from __future__ import annotations

from typing import Optional


class WsssBedError(ValueError):
    """Base class. ``image_id`` is filled in when the error is tied to a dataset image."""

    def __init__(self, message: str, image_id: Optional[str] = None) -> None:
        super().__init__(message)
        self.message = message
        self.image_id = image_id

    def __str__(self) -> str:
        if self.image_id is not None:
            return f"[{self.image_id}] {self.message}"
        return self.message


class DimensionMismatch(WsssBedError):
    pass


class ClassCountMismatch(WsssBedError):
    pass


class LengthMismatch(WsssBedError):
    pass


class ValueOutOfRange(WsssBedError):
    pass


class InvalidLabelValue(ValueOutOfRange):
    pass


class NonFinite(WsssBedError):
    pass


class NotBinarized(WsssBedError):
    pass


class ThresholdOutOfRange(WsssBedError):
    pass


class NoValidClasses(WsssBedError):
    pass


class FormatError(WsssBedError):
    """Malformed or unsupported file contents."""


class BadMagic(FormatError):
    pass


class BadVersion(FormatError):
    pass


class BadHeader(FormatError):
    pass


class TruncatedFile(FormatError):
    pass


class TrailingData(FormatError):
    pass


class UnsupportedPngFormat(FormatError):
    pass


class UnreadableImage(FormatError):
    pass


class ManifestError(WsssBedError):
    pass


class ParseError(ManifestError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateId(ManifestError):
    pass


class LabelOutOfRange(ManifestError):
    pass


class MissingFile(WsssBedError):
    pass


class MissingThreshold(WsssBedError):
    pass
