from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from ..ir import Bottom, IRDoc


class Track(enum.Enum):
    STRUCTURE = "STRUCTURE"
    TABLE = "TABLE"


class Format(enum.Enum):
    JSON_TREE = "JSON_TREE"
    XML_TREE = "XML_TREE"
    CSV = "CSV"
    HTML_TABLE = "HTML_TABLE"
    MARKDOWN_TABLE = "MARKDOWN_TABLE"
    LATEX_TABLE = "LATEX_TABLE"
    JSON_LIST = "JSON_LIST"
    XML_LIST = "XML_LIST"

    @property
    def track(self) -> Track:
        if self in (Format.JSON_TREE, Format.XML_TREE):
            return Track.STRUCTURE
        return Track.TABLE

    @property
    def display_name(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def parse_name(cls, name: str) -> "Format":
        key = name.strip().upper().replace("-", "_")
        aliases = {"JSON": "JSON_TREE", "XML": "XML_TREE", "HTML": "HTML_TABLE",
                   "MARKDOWN": "MARKDOWN_TABLE", "MD": "MARKDOWN_TABLE", "LATEX": "LATEX_TABLE"}
        return cls[aliases.get(key, key)]


_DISPLAY = {
    Format.JSON_TREE: "JSON",
    Format.XML_TREE: "XML",
    Format.CSV: "CSV",
    Format.HTML_TABLE: "HTML table",
    Format.MARKDOWN_TABLE: "Markdown table",
    Format.LATEX_TABLE: "LaTeX tabular",
    Format.JSON_LIST: "JSON list of records",
    Format.XML_LIST: "XML list of records",
}


@dataclass(frozen=True)
class Diagnostic:
    position: Optional[int]
    message: str
    fatal: bool = True


@dataclass(frozen=True)
class ParseOutcome:
    result: IRDoc
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not isinstance(self.result, Bottom)


class FormatError(Exception):
    """Fatal problem found while parsing one format; becomes Bottom."""

    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.position = position


class TrackMismatch(TypeError):
    """An IR variant was handed to a format of the other track."""


class NotRepresentable(ValueError):
    """The IR cannot be written in the target format without loss."""
