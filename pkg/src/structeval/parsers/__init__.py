"""Deterministic parsing of raw text into the IR, and the inverse writers.

:func:`parse` never raises for malformed input; it returns a
:class:`ParseOutcome` whose result is :class:`~structeval.ir.Bottom` with
diagnostics attached. Only undecodable bytes raise.
"""
from __future__ import annotations

from typing import Callable, Union

from ..ir import Bottom, IRDoc, TableIR, TreeNode, validate_tree
from . import grids, jsonfmt, xmlfmt
from ._base import (
    Diagnostic,
    Format,
    FormatError,
    NotRepresentable,
    ParseOutcome,
    Track,
    TrackMismatch,
)
from .extract import extract_candidate

__all__ = [
    "Diagnostic",
    "Format",
    "NotRepresentable",
    "ParseOutcome",
    "Track",
    "TrackMismatch",
    "extract_candidate",
    "parse",
    "serialize",
]

_PARSERS: dict[Format, Callable[[str], IRDoc]] = {
    Format.JSON_TREE: jsonfmt.parse_tree,
    Format.XML_TREE: xmlfmt.parse_tree,
    Format.CSV: grids.parse_csv,
    Format.HTML_TABLE: grids.parse_html,
    Format.MARKDOWN_TABLE: grids.parse_markdown,
    Format.LATEX_TABLE: grids.parse_latex,
    Format.JSON_LIST: jsonfmt.parse_list,
    Format.XML_LIST: xmlfmt.parse_list,
}

_WRITERS = {
    Format.JSON_TREE: jsonfmt.serialize_tree,
    Format.XML_TREE: xmlfmt.serialize_tree,
    Format.CSV: grids.serialize_csv,
    Format.HTML_TABLE: grids.serialize_html,
    Format.MARKDOWN_TABLE: grids.serialize_markdown,
    Format.LATEX_TABLE: grids.serialize_latex,
    Format.JSON_LIST: jsonfmt.serialize_list,
    Format.XML_LIST: xmlfmt.serialize_list,
}


def parse(fmt: Format, text: Union[str, bytes]) -> ParseOutcome:
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8")  # UnicodeDecodeError is the one hard error
    try:
        result = _PARSERS[fmt](text)
        if isinstance(result, TreeNode):
            validate_tree(result)
    except FormatError as exc:
        return ParseOutcome(Bottom(exc.message), (Diagnostic(exc.position, exc.message),))
    except RecursionError:
        msg = "nesting too deep"
        return ParseOutcome(Bottom(msg), (Diagnostic(None, msg),))
    return ParseOutcome(result)


def serialize(fmt: Format, doc: IRDoc) -> str:
    """Write ``doc`` in ``fmt``; ``parse(fmt, serialize(fmt, doc))`` is ir_equal to it.

    Raises :class:`TrackMismatch` when a tree meets a table format (or the
    reverse) and :class:`NotRepresentable` for IR the format cannot carry,
    e.g. a one-item list in XML.
    """
    if isinstance(doc, Bottom):
        raise ValueError("cannot serialize Bottom")
    want = TreeNode if fmt.track is Track.STRUCTURE else TableIR
    if not isinstance(doc, want):
        raise TrackMismatch(f"{fmt.value} expects a {want.__name__}, got {type(doc).__name__}")
    return _WRITERS[fmt](doc)
