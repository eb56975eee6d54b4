"""Exact unit-cost tree edit distance on labeled ordered trees.

Zhang & Shasha's keyroot dynamic program over post-order arrays, compiled
with numba. Insert, delete and rename each cost 1; renaming to an equal
label is free. Labels are arbitrary hashables supplied by the caller.
"""
from __future__ import annotations

from typing import Callable, Hashable, Sequence, TypeVar

import numba
import numpy as np

N = TypeVar("N")


def postorder(root: N, children: Callable[[N], Sequence[N]], label: Callable[[N], Hashable]):
    """Return (labels, leftmost-leaf indices) in post-order."""
    labels: list[Hashable] = []
    lml: list[int] = []
    # (node, leftmost index of its subtree once known, expanded?)
    stack: list[tuple[N, bool]] = [(root, False)]
    pending_left: list[int] = []
    while stack:
        node, expanded = stack.pop()
        kids = children(node)
        if expanded or not kids:
            if kids:
                left = pending_left.pop()
            else:
                left = len(labels)
            labels.append(label(node))
            lml.append(left)
            if pending_left and pending_left[-1] < 0:
                pending_left[-1] = left
            continue
        pending_left.append(-1)
        stack.append((node, True))
        stack.extend((k, False) for k in reversed(kids))
    return labels, np.asarray(lml, dtype=np.int64)


def keyroots(lml: np.ndarray) -> np.ndarray:
    """Highest post-order node for each distinct leftmost leaf, ascending."""
    last = {}
    for i, left in enumerate(lml.tolist()):
        last[left] = i
    return np.asarray(sorted(last.values()), dtype=np.int64)


@numba.njit(cache=True)
def _zhang_shasha(l1, lab1, kr1, l2, lab2, kr2):  # pragma: no cover - compiled
    n1 = l1.shape[0]
    n2 = l2.shape[0]
    td = np.zeros((n1, n2), dtype=np.int32)
    fd = np.zeros((n1 + 1, n2 + 1), dtype=np.int32)
    for a in range(kr1.shape[0]):
        i = kr1[a]
        li = l1[i]
        m = i - li + 2
        for b in range(kr2.shape[0]):
            j = kr2[b]
            lj = l2[j]
            n = j - lj + 2
            fd[0, 0] = 0
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + 1
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + 1
            for x in range(1, m):
                ii = li + x - 1
                for y in range(1, n):
                    jj = lj + y - 1
                    dele = fd[x - 1, y] + 1
                    ins = fd[x, y - 1] + 1
                    best = dele if dele < ins else ins
                    if l1[ii] == li and l2[jj] == lj:
                        ren = fd[x - 1, y - 1] + (0 if lab1[ii] == lab2[jj] else 1)
                        if ren < best:
                            best = ren
                        fd[x, y] = best
                        td[ii, jj] = best
                    else:
                        sub = fd[l1[ii] - li, l2[jj] - lj] + td[ii, jj]
                        if sub < best:
                            best = sub
                        fd[x, y] = best
    return td[n1 - 1, n2 - 1]


def tree_distance(a: N, b: N, children: Callable[[N], Sequence[N]], label: Callable[[N], Hashable]) -> int:
    """Unit-cost edit distance between the trees rooted at ``a`` and ``b``."""
    labs_a, l1 = postorder(a, children, label)
    labs_b, l2 = postorder(b, children, label)
    ids: dict[Hashable, int] = {}
    lab1 = np.asarray([ids.setdefault(x, len(ids)) for x in labs_a], dtype=np.int64)
    lab2 = np.asarray([ids.setdefault(x, len(ids)) for x in labs_b], dtype=np.int64)
    return int(_zhang_shasha(l1, lab1, keyroots(l1), l2, lab2, keyroots(l2)))
