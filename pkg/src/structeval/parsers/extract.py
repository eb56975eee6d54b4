"""Isolate the payload from chatty model output (code fences, prose)."""
from __future__ import annotations

import re

from ._base import Format

_FENCE_RE = re.compile(r"^[ \t]*(```|~~~)[^\n]*\n(.*?)^[ \t]*\1[ \t]*$", re.S | re.M)
_XML_START_RE = re.compile(r"<([A-Za-z_][\w.\-:]*)")


def _fenced(text: str) -> str | None:
    m = _FENCE_RE.search(text)
    return m.group(2) if m else None


def _balanced_json(text: str) -> str | None:
    starts = [i for i in (text.find("{"), text.find("[")) if i >= 0]
    if not starts:
        return None
    start = min(starts)
    stack = []
    in_str = escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_str:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch in "{[":
            stack.append("}" if ch == "{" else "]")
        elif ch in "}]":
            if not stack or stack.pop() != ch:
                return text[start:i + 1]
            if not stack:
                return text[start:i + 1]
    return text[start:]  # unbalanced: hand the truncated payload to the parser


def _xml_element(text: str) -> str | None:
    pos = 0
    while True:
        lt = text.find("<", pos)
        if lt < 0:
            return None
        m = _XML_START_RE.match(text, lt)
        if m:
            break
        pos = lt + 1
    name = m.group(1)
    close = text.rfind(f"</{name}>")
    if close >= 0:
        return text[lt:close + len(name) + 3]
    gt = text.find("/>", lt)
    if gt >= 0 and text.find(">", lt) == gt + 1:
        return text[lt:gt + 2]
    return text[lt:]


def _between(text: str, begin: re.Pattern, end: re.Pattern) -> str | None:
    b = begin.search(text)
    if not b:
        return None
    e = end.search(text, b.end())
    return text[b.start():e.end()] if e else text[b.start():]


_TABLE_OPEN = re.compile(r"<table\b", re.I)
_TABLE_CLOSE = re.compile(r"</table\s*>", re.I)
_TABULAR_OPEN = re.compile(r"\\begin\s*\{tabular\*?\}")
_TABULAR_CLOSE = re.compile(r"\\end\s*\{tabular\*?\}")


def _pipe_block(text: str) -> str | None:
    block: list[str] = []
    for line in text.splitlines():
        if line.strip().startswith("|"):
            block.append(line)
        elif block:
            break
    return "\n".join(block) if len(block) >= 2 else None


def extract_candidate(raw: str, fmt: Format) -> str:
    """Return the first complete candidate payload for ``fmt`` inside ``raw``.

    A fenced code block wins if present; inside it (or in the bare text) the
    format-specific locator picks the payload. Text with no recognizable
    wrapper comes back unchanged.
    """
    inner = _fenced(raw)
    text = inner if inner is not None else raw
    if fmt in (Format.JSON_TREE, Format.JSON_LIST):
        found = _balanced_json(text)
    elif fmt in (Format.XML_TREE, Format.XML_LIST):
        found = _xml_element(text)
    elif fmt is Format.HTML_TABLE:
        found = _between(text, _TABLE_OPEN, _TABLE_CLOSE)
    elif fmt is Format.LATEX_TABLE:
        found = _between(text, _TABULAR_OPEN, _TABULAR_CLOSE)
    elif fmt is Format.MARKDOWN_TABLE:
        found = _pipe_block(text)
    else:
        found = None
    if found is not None:
        return found
    return text
