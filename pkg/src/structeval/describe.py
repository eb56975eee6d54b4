"""Natural-language descriptions of an IR document.

Grids are described cell by cell ("In row i, the value of column h is v."),
trees leaf by leaf ("Under the path root/users/id, there exists a node with
value 101."). Together with the preamble, the statements pin down the
document exactly, so a careful reader can rebuild it.
"""
from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass

from .ir import Bottom, IRDoc, NodeKind, TableIR, TreeNode, canonicalize, escape_segment, leaves
from .parsers import Format, Track, TrackMismatch
from .values import Empty, render_scalar

SYSTEM_INSTRUCTION = "Output only the requested {format}; no explanation."


@dataclass(frozen=True)
class Description:
    preamble: str
    statements: tuple[str, ...]
    target_format: Format


def _article(name: str) -> str:
    # "an XML", "an HTML table", "a JSON", "a CSV"
    return "an" if name[:1] in "AEIOUHX" else "a"


def _segment_text(seg: str) -> str:
    # Quoting keeps statement boundaries unambiguous when a key contains a
    # comma (the template's own separator) or looks like a quoted string.
    if (not seg or "," in seg or seg.startswith('"') or seg != seg.strip()
            or any(unicodedata.category(ch) == "Cc" for ch in seg)):
        return json.dumps(seg, ensure_ascii=False)
    return escape_segment(seg)


def describe_path(segments) -> str:
    """Path as written in descriptions, e.g. ``root/users/0/id``."""
    return "/".join(["root", *(_segment_text(s) for s in segments)])


def _list_paths(tree: TreeNode) -> list[str]:
    found = []
    stack = [(tree, ())]
    while stack:
        node, path = stack.pop()
        if node.segment is not None:
            path = path + (node.segment,)
        if node.kind is NodeKind.LIST:
            found.append(describe_path(path))
        stack.extend((c, path) for c in reversed(node.children))
    return found


def _describe_table(table: TableIR, target: Format) -> Description:
    m, n = table.shape
    preamble = (
        f"Produce {_article(target.display_name)} {target.display_name} with {n} columns, in this order: "
        f"{json.dumps(list(table.headers), ensure_ascii=False)}, and {m} rows."
    )
    statements = tuple(
        f"In row {i}, the value of column {h} is {render_scalar(v)}."
        for i, row in enumerate(table.rows, start=1)
        for h, v in zip(table.headers, row)
    )
    return Description(preamble, statements, target)


def _describe_tree(tree: TreeNode, target: Format) -> Description:
    tree = canonicalize(tree)
    preamble = f"Produce {_article(target.display_name)} {target.display_name} document."
    lists = _list_paths(tree)
    if lists:
        preamble += " Lists, with positions numbered from 0, sit at: " + ", ".join(lists) + "."
    statements = []
    for path, node in leaves(tree):
        where = describe_path(path)
        if isinstance(node.value, Empty):
            statements.append(f"Under the path {where}, there exists {render_scalar(node.value)}.")
        else:
            statements.append(f"Under the path {where}, there exists a node with value {render_scalar(node.value)}.")
    return Description(preamble, tuple(statements), target)


def describe(doc: IRDoc, target: Format) -> Description:
    if isinstance(doc, Bottom):
        raise ValueError("cannot describe Bottom")
    if isinstance(doc, TableIR):
        if target.track is not Track.TABLE:
            raise TrackMismatch(f"{target.value} is not a table format")
        return _describe_table(doc, target)
    if target.track is not Track.STRUCTURE:
        raise TrackMismatch(f"{target.value} is not a structure format")
    return _describe_tree(doc, target)


def render_prompt(desc: Description) -> str:
    """The prompt exactly as a model receives it, one statement per line."""
    head = SYSTEM_INSTRUCTION.format(format=desc.target_format.display_name)
    return "\n".join([head, desc.preamble, *desc.statements]) + "\n"
