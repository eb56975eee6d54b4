# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:light
#     text_representation:
#       extension: .py
#       format_name: light
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# # One document, many formats
#
# Everything in structeval revolves around an intermediate representation
# (IR): hierarchical data becomes a tree of typed nodes, tabular data a
# header plus a grid of cells. Two documents are compared on their IR, never
# on their text, so `{"b": 1, "a": 2}` and `{"a": 2, "b": 1}` are the same
# thing.

from structeval import Format, csa, dump, nted, parse, serialize, ted, tree_from_python
from structeval.datagen import Complexity, gen_sample

# Parse a small JSON object and look at the tree.

out = parse(Format.JSON_TREE, '{"user": ["Alice"]}')
print(dump(out.result))

# Four nodes: the root, a mapping entry, a list and its single value. A
# second document that differs in one leaf is one rename away.

bob = parse(Format.JSON_TREE, '{"user": ["Bob"]}').result
ted(out.result, bob), nted(out.result, bob), csa(out.result, bob)

# CSA only credits exact (path, key, value) facts, so a single wrong name
# wipes out the only fact this document has; NTED still sees that three of
# four nodes are right.
#
# Tables work the same way: a header plus a grid of cells.

table = parse(Format.MARKDOWN_TABLE, "| Name | Age |\n|------|-----|\n| Bob | 30 |").result
table.headers, table.rows

# Numbers come back as numbers, so the same table lands on the same IR in
# whichever table format it was written.

for fmt in (Format.CSV, Format.HTML_TABLE, Format.LATEX_TABLE, Format.JSON_LIST, Format.XML_LIST):
    text = serialize(fmt, table)
    print(f"--- {fmt.value}\n{text}")
    assert parse(fmt, text).result == table

# ## A generated sample
#
# The corpus generator draws documents per format and complexity. SYMBOLIC
# samples are built to need escaping in every format.

sample = gen_sample(Format.XML_TREE, Complexity.SYMBOLIC, seed=3)
print(sample.raw)

# The prompt a model would see is rendered from the IR alone: one
# statement per leaf, with list positions spelled out.

print(sample.prompt)

# Serializing and parsing again gives back the same IR, escapes and all.

again = parse(sample.format, serialize(sample.format, sample.ir)).result
again == sample.ir

# Malformed text never raises; it becomes Bottom with a diagnostic.

broken = parse(Format.XML_TREE, sample.raw[:-12])
broken.ok, broken.diagnostics[0].message

# Scoring a generation against Bottom gives zero on both structural metrics.

nted(sample.ir, broken.result), csa(sample.ir, broken.result)

# Key order really does not matter:

a = tree_from_python({"b": 1, "a": {"y": 2, "x": 3}})
b = tree_from_python({"a": {"x": 3, "y": 2}, "b": 1})
a == b, nted(a, b), csa(a, b)
