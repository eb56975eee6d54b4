import random

import pytest

from randomdocs import random_object, random_table, random_tree, random_value
from structeval.ir import Bottom, NodeKind, TableIR, TreeNode, as_tree, canonicalize, node_count, tree_from_python
from structeval.metrics import SemanticTriple, csa, flatten, jaccard, node_label, nted, ted
from structeval.values import Empty
from ted_oracles import mapping_distance, script_distance, to_plain


def plain(tree):
    return to_plain(tree, node_label, lambda n: n.children)


def T(obj):
    return canonicalize(tree_from_python(obj))


ALICE, BOB = T({"user": ["Alice"]}), T({"user": ["Bob"]})
BARE = TreeNode(NodeKind.ROOT)


# -- the oracles themselves ----------------------------------------------------

def test_oracles_on_hand_cases():
    assert mapping_distance(plain(ALICE), plain(BOB)) == 1
    assert mapping_distance(plain(ALICE), plain(BARE)) == 3
    assert script_distance(plain(ALICE), plain(BOB)) == 1
    assert script_distance(plain(ALICE), plain(BARE)) == 3
    # generic labels: insert a parent over two leaves
    a = ("r", (("x", ()), ("y", ())))
    b = ("r", (("p", (("x", ()), ("y", ()))),))
    assert script_distance(a, b) == mapping_distance(a, b) == 1


def test_mapping_oracle_matches_literal_search():
    rng = random.Random(21)
    for _ in range(40):
        a, b = plain(random_tree(rng, 4)), plain(random_tree(rng, 4))
        assert mapping_distance(a, b) == script_distance(a, b)


# -- ted -----------------------------------------------------------------------

def test_ted_examples():
    assert ted(ALICE, ALICE) == 0
    assert ted(ALICE, BOB) == 1
    assert ted(ALICE, BARE) == 3


def test_ted_against_oracle():
    rng = random.Random(1234)
    for _ in range(1000):
        a, b = random_tree(rng), random_tree(rng)
        assert ted(a, b) == mapping_distance(plain(a), plain(b)), (plain(a), plain(b))


def test_ted_metric_axioms():
    rng = random.Random(77)
    for _ in range(300):
        a, b, c = (random_tree(rng, 10) for _ in range(3))
        ab, ba = ted(a, b), ted(b, a)
        assert ab == ba
        assert (ab == 0) == (a == b)
        assert ted(a, c) <= ab + ted(b, c)


def test_ted_bool_vs_int_labels_differ():
    assert ted(T({"a": True}), T({"a": 1})) == 1


def test_ted_large_tree_is_fast():
    import time
    a = T({"items": [{"k": i, "v": str(i)} for i in range(200)]})
    b = T({"items": [{"k": i, "v": str(i + (i % 7 == 0))} for i in range(200)]})
    start = time.perf_counter()
    assert ted(a, b) == 29
    assert time.perf_counter() - start < 5


# -- nted ----------------------------------------------------------------------

def test_nted_examples():
    assert nted(ALICE, ALICE) == 1.0
    assert nted(ALICE, BOB) == 0.75
    assert nted(ALICE, Bottom()) == 0.0
    assert nted(Bottom(), Bottom()) == 0.0
    t = TableIR.build(["Name", "Age"], [["Bob", 30]])
    assert nted(t, t) == 1.0
    assert nted(t, TableIR.build(["Name", "Age"], [["Bob", 31]])) == pytest.approx(1 - 1 / 8)


def test_nted_floor_at_zero():
    a, b = T({"a": {"a": {"a": 1}}}), T([1, 2, 3, 4, 5, 6])
    assert ted(a, b) > max(node_count(a), node_count(b))
    assert nted(a, b) == 0.0


def test_nted_range_and_identity():
    rng = random.Random(8)
    for _ in range(300):
        a, b = random_tree(rng, 12), random_tree(rng, 12)
        v = nted(a, b)
        assert 0.0 <= v <= 1.0
        assert (v == 1.0) == (a == b)
        assert v == nted(b, a)


# -- flatten / csa --------------------------------------------------------------

def test_flatten_examples():
    assert flatten(T({"user": ["Alice"]})) == {SemanticTriple("root/user", "0", "Alice")}
    table = TableIR.build(["Name", "Age"], [["Bob", 30]])
    assert flatten(table) == {
        SemanticTriple("header", "Name", "Name"), SemanticTriple("header", "Age", "Age"),
        SemanticTriple("row/0", "Name", "Bob"), SemanticTriple("row/0", "Age", 30),
    }
    assert flatten(Bottom()) == frozenset()
    assert SemanticTriple("root", "a", Empty.LIST) in flatten(T({"a": []}))


def test_flatten_root_scalar_and_escaping():
    assert flatten(tree_from_python(5)) == {SemanticTriple("root", "", 5)}
    assert flatten(T({"a/b": {"c": 1}})) == {SemanticTriple("root/a\\/b", "c", 1)}
    assert flatten(T({"a": {"b/c": 1}})) != flatten(T({"a": {"b": {"c": 1}}}))


def test_triples_distinguish_types():
    assert SemanticTriple("p", "k", True) != SemanticTriple("p", "k", 1)
    assert SemanticTriple("p", "k", 1) == SemanticTriple("p", "k", 1)


def test_csa_examples():
    assert csa(T({"a": 1, "b": 2}), T({"a": 1, "b": 2})) == 1.0
    assert csa(T({"a": 1, "b": 2}), T({"a": 1, "b": 3})) == pytest.approx(1 / 3)
    assert csa(T({"a": {"x": 1}}), T({"b": {"x": 1}})) == 0.0
    assert csa(T({"a": 1}), Bottom()) == 0.0
    assert csa(Bottom(), T({"a": 1})) == 0.0
    assert jaccard(frozenset(), frozenset()) == 1.0
    assert csa(TableIR((), ()), TableIR((), ())) == 1.0


def test_csa_table_column_order_irrelevant():
    a = TableIR.build(["x", "y"], [[1, 2]])
    b = TableIR.build(["y", "x"], [[2, 1]])
    assert csa(a, b) == 1.0
    assert nted(a, b) < 1.0


def test_csa_symmetry_and_range():
    rng = random.Random(4)
    for _ in range(300):
        a, b = random_tree(rng, 14), random_tree(rng, 14)
        v = csa(a, b)
        assert 0.0 <= v <= 1.0 and v == csa(b, a)
        ta, tb = random_table(rng), random_table(rng)
        assert csa(ta, tb) == csa(tb, ta)


def test_hallucination_and_omission_lower_csa():
    rng = random.Random(6)
    for _ in range(200):
        obj = random_object(rng)
        base = T(obj)
        extra = dict(obj, zz_extra="made up")
        assert csa(base, T(extra)) < 1.0
        key = next(k for k, v in obj.items() if not isinstance(v, (dict, list)) or v)
        fewer = {k: v for k, v in obj.items() if k != key}
        assert csa(base, T(fewer)) < 1.0


def test_key_order_invariance():
    rng = random.Random(10)
    for _ in range(200):
        obj = random_object(rng)
        keys = list(obj)
        rng.shuffle(keys)
        shuffled = {k: obj[k] for k in keys}
        a, b = tree_from_python(obj), tree_from_python(shuffled)
        other = tree_from_python(random_value(rng))
        assert csa(a, other) == csa(b, other)
        assert nted(a, other) == nted(b, other)


def test_nted_uses_embedded_table_sizes():
    t = TableIR.build(["a"], [[1], [2]])
    assert node_count(as_tree(t)) == 3 + 1 + 2 + 2
