"""JSON documents (structure track) and JSON record lists (table track)."""
from __future__ import annotations

import json
import math

from ..ir import InvalidIR, TableIR, TreeNode, tree_from_python, tree_to_python
from ..values import Empty, normalize_text
from ._base import FormatError, NotRepresentable


def _pairs_hook(pairs):
    out = {}
    for key, value in pairs:
        norm = normalize_text(key)
        if norm in out:
            raise FormatError(f"duplicate key {key!r}")
        out[norm] = value
    return out


def _reject_constant(name):
    raise FormatError(f"non-finite number {name}")


def _finite_float(literal: str) -> float:
    value = float(literal)
    if not math.isfinite(value):
        raise FormatError(f"number {literal} overflows a double")
    return value


def _loads(text: str):
    try:
        return json.loads(text, object_pairs_hook=_pairs_hook, parse_constant=_reject_constant,
                          parse_float=_finite_float)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.pos) from None
    except RecursionError:
        raise FormatError("nesting too deep") from None
    except ValueError as exc:  # e.g. integers past the digit limit
        raise FormatError(str(exc)) from None


def parse_tree(text: str) -> TreeNode:
    return tree_from_python(_loads(text))


def serialize_tree(tree: TreeNode) -> str:
    return json.dumps(tree_to_python(tree), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_list(text: str) -> TableIR:
    data = _loads(text)
    if not isinstance(data, list):
        raise FormatError("expected a top-level array of records")
    headers: dict[str, None] = {}
    for i, record in enumerate(data):
        if not isinstance(record, dict):
            raise FormatError(f"record {i} is not an object")
        for key, value in record.items():
            if isinstance(value, (dict, list)):
                raise FormatError(f"record {i} field {key!r} is not a scalar")
            headers.setdefault(key, None)
    names = list(headers)
    rows = [[record.get(h) for h in names] for record in data]
    try:
        return TableIR.build(names, rows)
    except InvalidIR as exc:
        raise FormatError(str(exc)) from None


def serialize_list(table: TableIR) -> str:
    if table.headers and not table.rows:
        raise NotRepresentable("a record list cannot carry headers without rows")
    records = []
    for row in table.rows:
        record = {}
        for h, cell in zip(table.headers, row):
            if isinstance(cell, Empty):
                raise NotRepresentable("empty-container cell")
            record[h] = cell
        records.append(record)
    # Column order is data here, so keys are not sorted.
    return json.dumps(records, indent=2, ensure_ascii=False) + "\n"
