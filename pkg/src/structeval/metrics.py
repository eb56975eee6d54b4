"""Structural (NTED) and content (CSA) scores between two IR documents."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .ir import Bottom, IRDoc, NodeKind, TableIR, TreeNode, as_tree, canonicalize, join_path, leaves, node_count
from .ted import tree_distance
from .values import Scalar, scalar_key


class NodeLabel(NamedTuple):
    kind: NodeKind
    tag: str
    value: tuple | None  # scalar_key of the value, VALUE nodes only


def node_label(node: TreeNode) -> NodeLabel:
    if node.index is not None:
        tag = str(node.index)
    elif node.kind is NodeKind.DICT:
        tag = node.key
    else:
        tag = ""
    value = scalar_key(node.value) if node.kind is NodeKind.VALUE else None
    return NodeLabel(node.kind, tag, value)


def _children(node: TreeNode):
    return node.children


def ted(a: TreeNode, b: TreeNode) -> int:
    """Exact unit-cost edit distance between two (canonicalized) trees."""
    if a == b:
        return 0
    return tree_distance(a, b, _children, node_label)


def nted(a: IRDoc, b: IRDoc) -> float:
    """``1 - ted / max(|a|, |b|)``, floored at 0; 0 whenever either side is Bottom.

    The floor matters because ancestry constraints can push the distance
    past the larger tree's size: ``{"a": {"a": {"a": 1}}}`` (5 nodes) against
    ``[1, 2, 3, 4, 5, 6]`` (8 nodes) is 9 edits apart.
    """
    if isinstance(a, Bottom) or isinstance(b, Bottom):
        return 0.0
    ta, tb = as_tree(a), as_tree(b)
    if ta == tb:
        return 1.0
    return max(0.0, 1.0 - ted(ta, tb) / max(node_count(ta), node_count(tb)))


@dataclass(frozen=True)
class SemanticTriple:
    path: str
    key: str
    value: Scalar

    @property
    def ident(self) -> tuple:
        return (self.path, self.key, scalar_key(self.value))

    def __eq__(self, other):
        if not isinstance(other, SemanticTriple):
            return NotImplemented
        return self.ident == other.ident

    def __hash__(self):
        return hash(self.ident)


def flatten(doc: IRDoc) -> frozenset[SemanticTriple]:
    """One (path, key, value) triple per leaf; tables add one per header.

    Tree leaves use the parent chain as path and their own key or list
    position as key, e.g. ``{"user": ["Alice"]}`` gives
    ``("root/user", "0", "Alice")``. Table cells become
    ``("row/<i>", header, cell)`` with 0-based ``i``.
    """
    if isinstance(doc, Bottom):
        return frozenset()
    if isinstance(doc, TableIR):
        triples = {SemanticTriple("header", h, h) for h in doc.headers}
        triples.update(
            SemanticTriple(f"row/{i}", h, cell)
            for i, row in enumerate(doc.rows)
            for h, cell in zip(doc.headers, row)
        )
        return frozenset(triples)
    triples = set()
    for segments, node in leaves(canonicalize(doc)):
        if segments:
            triples.add(SemanticTriple(join_path(segments[:-1]), segments[-1], node.value))
        else:
            triples.add(SemanticTriple("root", "", node.value))
    return frozenset(triples)


def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union


def csa(orig: IRDoc, gen: IRDoc) -> float:
    """Intersection over union of the two triple sets; 0 if either is Bottom."""
    if isinstance(orig, Bottom) or isinstance(gen, Bottom):
        return 0.0
    return jaccard(flatten(orig), flatten(gen))
