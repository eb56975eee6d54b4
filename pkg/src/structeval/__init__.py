"""Closed-loop evaluation of structured-data generation.

Raw documents in eight formats are parsed into one intermediate
representation (trees for JSON/XML, grids for the tabular formats),
described in plain language, regenerated by a model, parsed back, and
compared on structure (normalized tree edit distance) and content
(Jaccard over path/key/value triples).
"""
from .describe import Description, describe, render_prompt
from .ir import Bottom, NodeKind, TableIR, TreeNode, canonicalize, dump, ir_equal, tree_from_python
from .metrics import csa, flatten, nted, ted
from .parsers import Format, Track, extract_candidate, parse, serialize
from .textmetrics import bleu, rouge_n

__version__ = "0.1.0"

__all__ = [
    "Description", "describe", "render_prompt", "Bottom", "NodeKind", "TableIR", "TreeNode",
    "canonicalize", "dump", "ir_equal", "tree_from_python", "csa", "flatten", "nted", "ted",
    "Format", "Track", "extract_candidate", "parse", "serialize", "bleu", "rouge_n",
]
