"""XML documents (structure track) and XML record lists (table track).

Mapping for documents: the document element stands for ROOT and its name is
ignored. A child element becomes a mapping entry keyed by its tag; sibling
elements sharing a tag become a list; attributes become entries keyed
``@name``; the text of a leaf element is its value and an empty element is
null. An element carrying both attributes and text stores the text under
``#text``.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from ..ir import InvalidIR, NodeKind, TableIR, TreeNode, value_node
from ..values import Empty, normalize_scalar, normalize_text, scalar_to_text
from ._base import FormatError, NotRepresentable

TEXT_KEY = "#text"
_NAME_RE = re.compile(r"[^\W\d][\w.\-]*\Z")
_BAD_XML_CHARS = re.compile("[\x00-\x08\x0b-\x1f\ufffe\uffff]")


def _fromstring(text: str) -> ET.Element:
    try:
        return ET.fromstring(text.strip())
    except ET.ParseError as exc:
        raise FormatError(f"malformed XML: {exc}") from None
    except RecursionError:
        raise FormatError("nesting too deep") from None


def _check_no_mixed(el: ET.Element) -> None:
    if el.text and el.text.strip() and len(el):
        raise FormatError(f"mixed content in <{el.tag}>")
    for kid in el:
        if kid.tail and kid.tail.strip():
            raise FormatError(f"mixed content after <{kid.tag}>")


def _entries(el: ET.Element) -> list[TreeNode]:
    """Mapping entries (attributes, child elements, #text) of an element."""
    _check_no_mixed(el)
    entries = [
        TreeNode(NodeKind.DICT, key="@" + normalize_text(name), children=(value_node(v),))
        for name, v in el.attrib.items()
    ]
    groups: dict[str, list[ET.Element]] = {}
    for kid in el:
        groups.setdefault(normalize_text(kid.tag), []).append(kid)
    for tag, elems in groups.items():
        if len(elems) == 1:
            entries.append(TreeNode(NodeKind.DICT, key=tag, children=_content(elems[0])))
        else:
            items = tuple(_item(e, i) for i, e in enumerate(elems))
            entries.append(TreeNode(NodeKind.DICT, key=tag, children=(TreeNode(NodeKind.LIST, children=items),)))
    if not len(el) and el.text and el.text.strip():
        entries.append(TreeNode(NodeKind.DICT, key=TEXT_KEY, children=(value_node(el.text),)))
    return entries


def _is_leaf(el: ET.Element) -> bool:
    return not len(el) and not el.attrib


def _content(el: ET.Element) -> tuple[TreeNode, ...]:
    if _is_leaf(el):
        return (value_node(el.text or ""),)
    return tuple(_entries(el))


def _item(el: ET.Element, index: int) -> TreeNode:
    if _is_leaf(el):
        return value_node(el.text or "", index)
    return TreeNode(NodeKind.DICT, key=str(index), index=index, children=tuple(_entries(el)))


def parse_tree(text: str) -> TreeNode:
    root = _fromstring(text)
    return TreeNode(NodeKind.ROOT, children=_content(root))


# -- writing ----------------------------------------------------------------

def _check_name(name: str) -> str:
    if not _NAME_RE.match(name) or name.lower().startswith("xml"):
        raise NotRepresentable(f"{name!r} is not a usable XML element name")
    return name


def _text(value) -> str:
    if isinstance(value, Empty):
        raise NotRepresentable("empty containers have no XML form")
    text = scalar_to_text(value)
    if _BAD_XML_CHARS.search(text):
        raise NotRepresentable("control characters cannot appear in XML")
    return text


def _split_entries(entries):
    attrs, elems, text = [], [], None
    for entry in entries:
        if entry.key.startswith("@"):
            (child,) = entry.children
            if child.kind is not NodeKind.VALUE:
                raise NotRepresentable(f"attribute {entry.key!r} must hold a scalar")
            attrs.append(f" {_check_name(entry.key[1:])}={quoteattr(_text(child.value))}")
        elif entry.key == TEXT_KEY:
            (child,) = entry.children
            if child.kind is not NodeKind.VALUE or child.value is None:
                raise NotRepresentable("#text must hold a non-null scalar")
            text = _text(child.value)
        else:
            elems.append(entry)
    if text is not None and (elems or not attrs):
        raise NotRepresentable("#text only round-trips beside attributes alone")
    return "".join(attrs), elems, text


def _write_element(name: str, children, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    _check_name(name)
    if len(children) == 1 and children[0].kind is NodeKind.VALUE:
        value = children[0].value
        if value is None:
            out.append(f"{pad}<{name}/>")
        else:
            out.append(f"{pad}<{name}>{escape(_text(value))}</{name}>")
        return
    if len(children) == 1 and children[0].kind is NodeKind.LIST:
        raise NotRepresentable("a list must sit directly under a mapping key")
    if not children or any(c.kind is not NodeKind.DICT for c in children):
        raise NotRepresentable(f"unsupported content under <{name}>")
    attrs, elems, text = _split_entries(children)
    if text is not None:
        out.append(f"{pad}<{name}{attrs}>{escape(text)}</{name}>")
    elif not elems:
        out.append(f"{pad}<{name}{attrs}/>")
    else:
        out.append(f"{pad}<{name}{attrs}>")
        _write_entries(elems, indent + 1, out)
        out.append(f"{pad}</{name}>")


def _write_entries(entries, indent: int, out: list[str]) -> None:
    for entry in entries:
        if len(entry.children) == 1 and entry.children[0].kind is NodeKind.LIST:
            items = entry.children[0].children
            if len(items) < 2:
                raise NotRepresentable(f"list under {entry.key!r} needs at least two items")
            for item in items:
                if item.kind is NodeKind.VALUE:
                    _write_element(entry.key, (item,), indent, out)
                elif item.kind is NodeKind.DICT:
                    if not item.children:
                        raise NotRepresentable("empty object inside a list")
                    _write_element(entry.key, item.children, indent, out)
                else:
                    raise NotRepresentable("nested lists have no XML form")
        else:
            _write_element(entry.key, entry.children, indent, out)


def serialize_tree(tree: TreeNode, root_name: str = "root") -> str:
    out: list[str] = []
    _write_element(root_name, tree.children, 0, out)
    return "\n".join(out) + "\n"


# -- record lists -----------------------------------------------------------

def parse_list(text: str) -> TableIR:
    root = _fromstring(text)
    _check_no_mixed(root)
    if root.text and root.text.strip():
        raise FormatError("text directly inside the record container")
    names: dict[str, None] = {}
    records = []
    for i, rec in enumerate(root):
        _check_no_mixed(rec)
        if rec.text and rec.text.strip():
            raise FormatError(f"record {i} holds bare text")
        fields: dict[str, object] = {}
        pairs = list(rec.attrib.items()) + [(f.tag, f) for f in rec]
        for name, val in pairs:
            key = normalize_text(name)
            if key in fields:
                raise FormatError(f"record {i} repeats field {key!r}")
            if isinstance(val, ET.Element):
                if len(val) or val.attrib:
                    raise FormatError(f"record {i} field {key!r} is not a scalar")
                val = val.text or ""
            fields[key] = normalize_scalar(val)
            names.setdefault(key, None)
        records.append(fields)
    headers = list(names)
    try:
        return TableIR.build(headers, [[rec.get(h) for h in headers] for rec in records])
    except InvalidIR as exc:
        raise FormatError(str(exc)) from None


def serialize_list(table: TableIR) -> str:
    if table.headers and not table.rows:
        raise NotRepresentable("a record list cannot carry headers without rows")
    for h in table.headers:
        _check_name(h)
    out = ["<rows>"]
    for row in table.rows:
        out.append("  <row>")
        for h, cell in zip(table.headers, row):
            if cell is None:
                out.append(f"    <{h}/>")
            else:
                out.append(f"    <{h}>{escape(_text(cell))}</{h}>")
        out.append("  </row>")
    out.append("</rows>")
    return "\n".join(out) + "\n"
