"""Scalar values shared by every IR node and table cell.

Scalars are plain Python objects (``str``, ``int``, ``float``, ``bool``,
``None``) plus the :class:`Empty` markers for empty containers. Because
``True == 1`` in Python, equality between scalars always goes through
:func:`scalar_key`, which tags each value with its type.
"""
from __future__ import annotations

import enum
import json
import math
import re
import unicodedata
from typing import Union


class Empty(enum.Enum):
    """Marker stored on a VALUE node standing in for an empty container."""

    LIST = "list"
    DICT = "dict"

    def __repr__(self) -> str:
        return f"Empty.{self.name}"


Scalar = Union[str, int, float, bool, None, Empty]

_INT_RE = re.compile(r"[+-]?\d+\Z")
_REAL_RE = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?\Z")
_NULL_WORDS = frozenset({"null", "nil"})


def normalize_text(text: str) -> str:
    """NFC-normalize and strip surrounding whitespace."""
    return unicodedata.normalize("NFC", text).strip()


def normalize_scalar(value: object) -> Scalar:
    """Apply the cross-format normalization rules to one scalar.

    Text is trimmed and NFC-normalized, then decimal integers and reals are
    parsed, ``true``/``false`` (any case) become booleans and empty cells or
    ``null``/``nil`` become ``None``. Integer-valued reals collapse
    to ``int``.
    """
    if value is None or isinstance(value, (bool, Empty)):
        return value
    if isinstance(value, int):
        return int(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite real {value!r}")
        if value.is_integer():
            return int(value)
        return value
    if not isinstance(value, str):
        raise TypeError(f"unsupported scalar type {type(value).__name__}")

    text = normalize_text(value)
    if not text:
        return None
    lowered = text.lower()
    if lowered in _NULL_WORDS:
        return None
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    if _INT_RE.match(text):
        try:
            return int(text)
        except ValueError:  # beyond the interpreter's digit limit
            return text
    if _REAL_RE.match(text):
        real = float(text)
        if math.isfinite(real):
            return int(real) if real.is_integer() else real
    return text


# Type ranks keep bool/int/float apart when hashing and ordering.
_RANK = {type(None): 0, bool: 1, int: 2, float: 3, str: 4, Empty: 5}


def scalar_key(value: Scalar) -> tuple:
    """Hashable, type-aware identity of a scalar."""
    rank = _RANK[type(value)]
    if isinstance(value, Empty):
        return (rank, value.value)
    return (rank, value)


def is_scalar(value: object) -> bool:
    return type(value) in _RANK


def render_scalar(value: Scalar) -> str:
    """Canonical human-readable rendering used in descriptions.

    Text is emitted verbatim unless verbatim output would be ambiguous
    (surrounding whitespace, control characters, or a leading double quote),
    in which case it is JSON-quoted.
    """
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, Empty):
        return "an empty list" if value is Empty.LIST else "an empty object"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if (
        value != value.strip()
        or value.startswith('"')
        or any(unicodedata.category(ch) == "Cc" for ch in value)
    ):
        return json.dumps(value, ensure_ascii=False)
    return value


def read_rendered(text: str) -> Scalar:
    """Inverse of :func:`render_scalar` for non-marker values."""
    if text.startswith('"'):
        try:
            decoded = json.loads(text)
        except json.JSONDecodeError:
            return normalize_scalar(text)
        if isinstance(decoded, str):
            return normalize_scalar(decoded)
    return normalize_scalar(text)


def scalar_to_text(value: Scalar) -> str:
    """Cell text for grid formats (CSV, Markdown, HTML, LaTeX, XML text).

    ``None`` becomes the empty string, which every grid parser reads back as
    null.
    """
    if value is None:
        return ""
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, Empty):
        raise ValueError("empty-container markers have no cell representation")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def debug_scalar(value: Scalar) -> str:
    """Tagged rendering for the line-oriented debug dump."""
    if value is None:
        return "null"
    if isinstance(value, bool):
        return f"bool:{'true' if value else 'false'}"
    if isinstance(value, Empty):
        return f"empty:{value.value}"
    if isinstance(value, int):
        return f"int:{value}"
    if isinstance(value, float):
        return f"float:{value!r}"
    return "text:" + json.dumps(value, ensure_ascii=False)
