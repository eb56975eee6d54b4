"""Format-agnostic intermediate representation.

Hierarchical documents become trees of :class:`TreeNode` (kind, key, value,
index, children). Grids become :class:`TableIR` (headers plus rows of
scalars). Unparseable output is :class:`Bottom`. All three are immutable.

Tree layout, by example: ``{"user": ["Alice"]}`` is::

    ROOT
      DICT key="user"
        LIST
          VALUE index=0 value="Alice"

A DICT node is one mapping entry; an object nested inside a list is a DICT
node keyed by its decimal position whose children are the entries.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Sequence, Union

from .values import Empty, Scalar, debug_scalar, is_scalar, normalize_scalar, normalize_text, scalar_key


class NodeKind(enum.Enum):
    ROOT = "ROOT"
    DICT = "DICT"
    LIST = "LIST"
    VALUE = "VALUE"


class InvalidIR(ValueError):
    """Raised when a tree or table breaks the IR schema."""


@dataclass(frozen=True, eq=False)
class TreeNode:
    kind: NodeKind
    key: Optional[str] = None
    value: Scalar = None
    index: Optional[int] = None
    children: tuple["TreeNode", ...] = ()

    def __post_init__(self):
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))

    @cached_property
    def signature(self) -> tuple:
        """Structural identity; two nodes are equal iff signatures match."""
        value = scalar_key(self.value) if self.kind is NodeKind.VALUE else None
        return (
            self.kind.value,
            self.key,
            value,
            self.index,
            tuple(child.signature for child in self.children),
        )

    def __eq__(self, other):
        if not isinstance(other, TreeNode):
            return NotImplemented
        return self is other or self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    @property
    def segment(self) -> Optional[str]:
        """Path segment this node contributes: its index, else its key."""
        if self.index is not None:
            return str(self.index)
        if self.kind is NodeKind.DICT:
            return self.key
        return None

    def walk(self) -> Iterator["TreeNode"]:
        """Pre-order traversal (iterative, so deep trees are fine)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True, eq=False)
class TableIR:
    headers: tuple[str, ...]
    rows: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "headers", tuple(self.headers))
        object.__setattr__(self, "rows", tuple(tuple(row) for row in self.rows))

    @classmethod
    def build(cls, headers: Sequence[str], rows: Sequence[Sequence[object]]) -> "TableIR":
        """Normalize headers and cells, then validate."""
        table = cls(
            tuple(normalize_text(h) for h in headers),
            tuple(tuple(normalize_scalar(c) for c in row) for row in rows),
        )
        validate_table(table)
        return table

    @cached_property
    def signature(self) -> tuple:
        return (self.headers, tuple(tuple(scalar_key(c) for c in row) for row in self.rows))

    def __eq__(self, other):
        if not isinstance(other, TableIR):
            return NotImplemented
        return self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.headers)


@dataclass(frozen=True)
class Bottom:
    """Parse failure. Equal to every other Bottom regardless of message."""

    message: str = field(default="", compare=False)


IRDoc = Union[TreeNode, TableIR, Bottom]


# -- construction helpers ---------------------------------------------------

def value_node(value: object, index: Optional[int] = None) -> TreeNode:
    return TreeNode(NodeKind.VALUE, value=normalize_scalar(value), index=index)


def _convert(obj: object, index: Optional[int]) -> list[TreeNode]:
    # Returns the node(s) representing obj; a mapping outside a list yields
    # its entries directly (they hang off the enclosing node).
    if isinstance(obj, dict):
        if not obj:
            return [TreeNode(NodeKind.VALUE, value=Empty.DICT, index=index)]
        entries = [
            TreeNode(NodeKind.DICT, key=normalize_text(str(k)), children=tuple(_convert(v, None)))
            for k, v in obj.items()
        ]
        if len({e.key for e in entries}) != len(entries):
            raise InvalidIR("mapping keys collide after normalization")
        if index is not None:
            return [TreeNode(NodeKind.DICT, key=str(index), index=index, children=tuple(entries))]
        return entries
    if isinstance(obj, (list, tuple)):
        if not obj:
            return [TreeNode(NodeKind.VALUE, value=Empty.LIST, index=index)]
        items = [node for i, item in enumerate(obj) for node in _convert(item, i)]
        return [TreeNode(NodeKind.LIST, index=index, children=tuple(items))]
    if isinstance(obj, Empty):
        return [TreeNode(NodeKind.VALUE, value=obj, index=index)]
    return [value_node(obj, index)]


def tree_from_python(obj: object) -> TreeNode:
    """Build a tree from JSON-like Python data (dict, list, scalars)."""
    return TreeNode(NodeKind.ROOT, children=tuple(_convert(obj, None)))


def _object_like(children: Sequence[TreeNode]) -> bool:
    return bool(children) and all(c.kind is NodeKind.DICT for c in children)


def _to_python(children: Sequence[TreeNode]) -> object:
    if _object_like(children):
        return {c.key: _to_python(c.children) for c in children}
    if len(children) != 1:
        raise InvalidIR("container must hold entries or exactly one child")
    node = children[0]
    if node.kind is NodeKind.VALUE:
        if node.value is Empty.LIST:
            return []
        if node.value is Empty.DICT:
            return {}
        return node.value
    if node.kind is NodeKind.LIST:
        return [_element_to_python(c) for c in node.children]
    raise InvalidIR(f"unexpected {node.kind.value} node")


def _element_to_python(node: TreeNode) -> object:
    if node.kind is NodeKind.DICT:
        return {c.key: _to_python(c.children) for c in node.children}
    return _to_python([node])


def tree_to_python(tree: TreeNode) -> object:
    """Inverse of :func:`tree_from_python`."""
    if tree.kind is not NodeKind.ROOT:
        raise InvalidIR("expected a ROOT node")
    return _to_python(tree.children)


# -- validation -------------------------------------------------------------

def validate_tree(tree: TreeNode) -> None:
    """Check the node-kind constraints; raise :class:`InvalidIR` on breach."""
    if tree.kind is not NodeKind.ROOT:
        raise InvalidIR("tree root must be ROOT")
    stack: list[tuple[TreeNode, Optional[TreeNode]]] = [(tree, None)]
    while stack:
        node, parent = stack.pop()
        kind = node.kind
        if kind is NodeKind.ROOT:
            if parent is not None:
                raise InvalidIR("ROOT below the top of the tree")
            if node.key is not None or node.value is not None or node.index is not None:
                raise InvalidIR("ROOT carries key, value or index")
        elif kind is NodeKind.VALUE:
            if node.children:
                raise InvalidIR("VALUE node with children")
            if not is_scalar(node.value):
                raise InvalidIR(f"VALUE holds non-scalar {node.value!r}")
        elif kind is NodeKind.DICT:
            if node.key is None:
                raise InvalidIR("DICT node without key")
            if node.value is not None:
                raise InvalidIR("DICT node with value")
        elif kind is NodeKind.LIST:
            if node.key is not None or node.value is not None:
                raise InvalidIR("LIST node with key or value")
        under_list = parent is not None and parent.kind is NodeKind.LIST
        if under_list != (node.index is not None):
            raise InvalidIR("index must be present exactly under LIST parents")
        keys = [c.key for c in node.children if c.kind is NodeKind.DICT and c.index is None]
        if len(set(keys)) != len(keys):
            raise InvalidIR("duplicate keys among sibling entries")
        for position, child in enumerate(node.children):
            if kind is NodeKind.LIST and child.index != position:
                raise InvalidIR(f"list child at {position} has index {child.index}")
            stack.append((child, node))


def validate_table(table: TableIR) -> None:
    width = len(table.headers)
    for h in table.headers:
        if not isinstance(h, str) or not h.strip():
            raise InvalidIR("headers must be non-empty text")
    if len(set(table.headers)) != width:
        raise InvalidIR("duplicate header names")
    for i, row in enumerate(table.rows):
        if len(row) != width:
            raise InvalidIR(f"row {i} has {len(row)} cells, expected {width}")
        for cell in row:
            if not is_scalar(cell) or isinstance(cell, Empty):
                raise InvalidIR(f"row {i} holds non-scalar cell {cell!r}")


# -- core operations --------------------------------------------------------

def node_count(tree: TreeNode) -> int:
    """Total number of nodes, ROOT included."""
    return sum(1 for _ in tree.walk())


def _sort_key(node: TreeNode) -> tuple:
    if node.kind is NodeKind.DICT:
        return (0, node.key.encode("utf-8"))
    return (1, b"")


def canonicalize(tree: TreeNode) -> TreeNode:
    """Sort DICT entries by key (UTF-8 byte order); list order is kept."""
    children = tuple(canonicalize(c) for c in tree.children)
    if tree.kind is not NodeKind.LIST:
        children = tuple(sorted(children, key=_sort_key))
    if children == tree.children:
        return tree
    return TreeNode(tree.kind, tree.key, tree.value, tree.index, children)


def embed_table(table: TableIR) -> TreeNode:
    """Tree form of a table: ROOT -> [DICT "header" -> VALUEs, LIST -> rows]."""
    header = TreeNode(
        NodeKind.DICT,
        key="header",
        children=tuple(TreeNode(NodeKind.VALUE, value=h) for h in table.headers),
    )
    rows = TreeNode(
        NodeKind.LIST,
        children=tuple(
            TreeNode(
                NodeKind.LIST,
                index=i,
                children=tuple(TreeNode(NodeKind.VALUE, value=c, index=j) for j, c in enumerate(row)),
            )
            for i, row in enumerate(table.rows)
        ),
    )
    return TreeNode(NodeKind.ROOT, children=(header, rows))


def ir_equal(a: IRDoc, b: IRDoc) -> bool:
    """Equality after canonicalization; Bottom equals only Bottom."""
    if isinstance(a, Bottom) or isinstance(b, Bottom):
        return isinstance(a, Bottom) and isinstance(b, Bottom)
    if isinstance(a, TreeNode) and isinstance(b, TreeNode):
        return canonicalize(a) == canonicalize(b)
    if isinstance(a, TableIR) and isinstance(b, TableIR):
        return a == b
    return False


def as_tree(doc: IRDoc) -> TreeNode:
    """Canonical tree view of a non-Bottom document."""
    if isinstance(doc, TableIR):
        return embed_table(doc)
    if isinstance(doc, TreeNode):
        return canonicalize(doc)
    raise TypeError("Bottom has no tree form")


def nesting_depth(tree: TreeNode) -> int:
    """Deepest chain of containers (objects and lists) in a tree."""
    best = 0
    stack = [(tree, 0)]
    while stack:
        node, depth = stack.pop()
        if node.kind is NodeKind.LIST or (
            node.kind in (NodeKind.ROOT, NodeKind.DICT) and _object_like(node.children)
        ):
            depth += 1
        best = max(best, depth)
        stack.extend((c, depth) for c in node.children)
    return best


def leaves(tree: TreeNode) -> Iterator[tuple[tuple[str, ...], TreeNode]]:
    """Yield (segments, node) for every VALUE node in pre-order."""
    stack: list[tuple[TreeNode, tuple[str, ...]]] = [(tree, ())]
    while stack:
        node, path = stack.pop()
        seg = node.segment
        if seg is not None:
            path = path + (seg,)
        if node.kind is NodeKind.VALUE:
            yield path, node
        stack.extend((c, path) for c in reversed(node.children))


def escape_segment(segment: str) -> str:
    return segment.replace("\\", "\\\\").replace("/", "\\/")


def join_path(segments) -> str:
    """Slash-joined path from ``root``; slashes inside keys are escaped."""
    return "/".join(["root", *(escape_segment(s) for s in segments)])


# -- debug serialization ----------------------------------------------------

def _node_line(node: TreeNode, depth: int) -> str:
    parts = [str(depth), node.kind.value]
    if node.key is not None:
        parts.append("key=" + json.dumps(node.key, ensure_ascii=False))
    if node.index is not None:
        parts.append(f"index={node.index}")
    if node.kind is NodeKind.VALUE:
        parts.append("value=" + debug_scalar(node.value))
    return " ".join(parts)


def dump(doc: IRDoc) -> str:
    """Stable line-oriented rendering, one node per line prefixed by depth.

    Trees print as ``<depth> <KIND> [key=..] [index=..] [value=..]``; tables
    as ``TABLE``, one ``header`` line and one line per row; Bottom as
    ``BOTTOM <message>``.
    """
    if isinstance(doc, Bottom):
        return f"BOTTOM {doc.message}".rstrip() + "\n"
    if isinstance(doc, TableIR):
        lines = [f"TABLE rows={len(doc.rows)} cols={len(doc.headers)}"]
        lines.append("header " + json.dumps(list(doc.headers), ensure_ascii=False))
        for i, row in enumerate(doc.rows):
            lines.append(f"row {i} " + " | ".join(debug_scalar(c) for c in row))
        return "\n".join(lines) + "\n"
    lines = []
    stack = [(doc, 0)]
    while stack:
        node, depth = stack.pop()
        lines.append(_node_line(node, depth))
        stack.extend((c, depth + 1) for c in reversed(node.children))
    return "\n".join(lines) + "\n"
