"""Controlled damage to an IR document, standing in for a weak model.

The draws are made in a fixed order whatever the rate, so for one seed the
set of damaged leaves at a lower rate is a subset of the set at a higher
rate. That keeps Monte-Carlo comparisons across rates low-variance.
"""
from __future__ import annotations

import numpy as np

from ..ir import Bottom, IRDoc, TableIR, TreeNode, tree_from_python, tree_to_python
from ..values import Empty, normalize_scalar, scalar_key

_WORDS = (
    "acorn birch coral drift ember flint grove haze iris jade knoll lark "
    "marsh north oak plume quay reef slate thorn vale wren"
).split()


def fresh_scalar(rng: np.random.Generator, old):
    """A random scalar that is guaranteed to differ from ``old``."""
    old_key = scalar_key(old)
    while True:
        pick = int(rng.integers(5))
        if pick == 0:
            value = int(rng.integers(0, 100_000))
        elif pick == 1:
            value = round(float(rng.uniform(-500, 500)), 3)
        elif pick == 2:
            value = bool(rng.integers(2))
        elif pick == 3:
            value = None
        else:
            value = " ".join(_WORDS[int(i)] for i in rng.integers(len(_WORDS), size=2)).title()
        value = normalize_scalar(value)
        if scalar_key(value) != old_key:
            return value


def _replace_leaves(obj, rng: np.random.Generator, rate: float):
    if isinstance(obj, dict):
        return {k: _replace_leaves(v, rng, rate) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_replace_leaves(v, rng, rate) for v in obj]
    # one uniform and one candidate per leaf, whether or not it is used
    hit = rng.random() < rate
    candidate = fresh_scalar(rng, obj)
    if isinstance(obj, Empty) or not hit:
        return obj
    return candidate


def _hoist_candidates(obj, found):
    # (outer mapping, inner key, entry key) where outer[inner] is a mapping
    # with at least two entries and entry can move into outer without clash
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, dict) and len(v) >= 2:
                found.extend((obj, k, ek) for ek in v if ek not in obj)
            _hoist_candidates(v, found)
    elif isinstance(obj, list):
        for v in obj:
            _hoist_candidates(v, found)
    return found


def _corrupt_tree(tree: TreeNode, rate: float, rng: np.random.Generator) -> TreeNode:
    data = _replace_leaves(tree_to_python(tree), rng, rate)
    move = rng.random() < rate / 2
    pick = rng.random()
    if move:
        candidates = _hoist_candidates(data, [])
        if candidates:
            outer, inner, entry = candidates[int(pick * len(candidates))]
            outer[entry] = outer[inner].pop(entry)
    return tree_from_python(data)


def _corrupt_table(table: TableIR, rate: float, rng: np.random.Generator) -> TableIR:
    rows = [[_replace_leaves(cell, rng, rate) for cell in row] for row in table.rows]
    headers = list(table.headers)
    drop = rng.random() < rate / 2
    pick = rng.random()
    if drop and len(headers) > 1:
        j = int(pick * len(headers))
        del headers[j]
        rows = [row[:j] + row[j + 1:] for row in rows]
    return TableIR.build(headers, rows)


def corrupt(ir: IRDoc, rate: float, seed: int) -> IRDoc:
    """Replace each leaf with probability ``rate``; with probability
    ``rate / 2`` also hoist one subtree a level up (trees) or drop a column
    (tables). Deterministic in ``(ir, rate, seed)``.
    """
    if isinstance(ir, Bottom):
        raise ValueError("cannot corrupt Bottom")
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    if rate == 0:
        return ir
    rng = np.random.default_rng(seed)
    if isinstance(ir, TableIR):
        return _corrupt_table(ir, rate, rng)
    return _corrupt_tree(ir, rate, rng)
