import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from accessibility.errors import DomainError
from accessibility.graph_core import (
    FiniteGraph,
    GraphMorphism,
    GroupAction,
    LineGraph,
    line_action,
    permutation_morphism,
    trivial_action,
)
from accessibility.separation import separation_by, separation_from_sets
from accessibility.tree_decomp import (
    Order,
    SizeSequence,
    Tree,
    TreeDecomposition,
    adhesion_sets,
    compare_size,
    compressible_edges,
    contract_compressible,
    induced_separation,
    induced_td_after_contraction,
    is_incompressible,
    is_invariant,
    is_refinement,
    line_tree,
    path_tree,
    size_sequence,
    td_from_separation,
    validate_td,
)

LINE = LineGraph()
P3 = FiniteGraph(3, [(0, 1), (1, 2)])


def translations():
    return GroupAction([GraphMorphism("t", lambda v: v + 1, "T"), GraphMorphism("T", lambda v: v - 1, "t")], 6)


def line_td(first=None):
    def part(t):
        if first is not None and t == 0:
            return frozenset(first)
        return frozenset({t, t + 1})

    def locate(v):
        return frozenset(t for t in (v - 1, v) if v in part(t))

    return TreeDecomposition(LINE, line_tree(), part=part, locate=locate)


def p3_td():
    return TreeDecomposition(P3, path_tree(2), parts={0: {0, 1}, 1: {1, 2}})


def test_line_td_valid():
    assert validate_td(line_td()).valid


def test_line_td_with_shrunk_part_violates_t2():
    report = validate_td(line_td(first={0}))
    assert not report.valid
    assert "T2" in {v.axiom for v in report.violations}


def test_misordered_path_violates_t3():
    g = FiniteGraph(4, [(0, 1), (1, 2), (2, 3)])
    # parts {1,2}, {3,4}, {2,3} on a path, relabelled to 0..3
    td = TreeDecomposition(g, path_tree(3), parts={0: {0, 1}, 1: {2, 3}, 2: {1, 2}})
    report = validate_td(td)
    assert not report.valid
    t3 = [v for v in report.violations if v.axiom == "T3"]
    # the vertex missing from the middle part is 2 in the original labelling (1 here)
    assert t3 and t3[0].witness[-1] == 1


def test_missing_vertex_violates_t1():
    td = TreeDecomposition(P3, path_tree(2), parts={0: {0, 1}, 1: {1}})
    assert "T1" in {v.axiom for v in validate_td(td).violations}


def test_adhesion_sets():
    rep = adhesion_sets(TreeDecomposition(LINE, line_tree(), part=line_td().part, locate=line_td().locate,
                                          adhesion_bound=1))
    assert rep.finite and all(s == frozenset({max(e)}) for e, s in rep.sets.items())
    single = TreeDecomposition(P3, Tree.finite([0], []), parts={0: {0, 1, 2}})
    assert adhesion_sets(single).sets == {} and adhesion_sets(single).finite
    assert list(adhesion_sets(p3_td()).sets.values()) == [frozenset({1})]


def test_induced_separations():
    x = induced_separation(line_td(), (0, 1))
    assert x == separation_by(LINE, {1}, lambda v: v < 1)
    assert induced_separation(p3_td(), (0, 1)).sets() == ({0, 1}, {1, 2})
    star = FiniteGraph(4, [(0, 1), (0, 2), (0, 3)])
    td = TreeDecomposition(star, Tree.finite(["a", "b", "c"], [("a", "b"), ("b", "c")]),
                           parts={"a": {0, 1}, "b": {0, 2}, "c": {0, 3}})
    y = induced_separation(td, ("a", "b"))
    assert y.order == 1 and y.sets() == ({0, 1}, {0, 2, 3})
    with pytest.raises(DomainError):
        induced_separation(p3_td(), (0, 0))


def test_td_from_separation_roundtrip():
    x = separation_from_sets(P3, {0, 1}, {1, 2})
    td = td_from_separation(x)
    assert validate_td(td).valid
    assert induced_separation(td, ("A", "B")) == x


def test_invariance():
    assert is_invariant(line_td(), translations(), 4)
    assert is_invariant(p3_td(), trivial_action())

    def part(t):
        return frozenset({2 * t, 2 * t + 1, 2 * t + 2})

    td = TreeDecomposition(LINE, line_tree(), part=part,
                           locate=lambda v: frozenset(t for t in (v // 2 - 1, v // 2) if v in part(t)))
    verdict = is_invariant(td, translations(), 4)
    assert not verdict and verdict.witness is not None


def test_refinement():
    td = p3_td()
    assert is_refinement(td, td, {0: 0, 1: 1})
    coarse = td_from_separation(separation_by(LINE, {1}, lambda v: v < 1))
    assert is_refinement(line_td(), coarse, lambda t: "A" if t <= 0 else "B")
    g = FiniteGraph(4, [(0, 1), (1, 2), (2, 3)])
    fine = TreeDecomposition(g, path_tree(3), parts={0: {0, 1}, 1: {1, 2}, 2: {2, 3}})
    two = TreeDecomposition(g, path_tree(2), parts={0: {0, 1, 2, 3}, 1: {1, 2}})
    with pytest.raises(DomainError):
        is_refinement(fine, two, {0: 0, 1: 1, 2: 0})


def swap_edge():
    return GroupAction([permutation_morphism("s", {0: 1, 1: 0})])


def test_compressible_edges_examples():
    assert len(compressible_edges(path_tree(3), trivial_action())) == 2
    assert compressible_edges(path_tree(2), swap_edge()) == []
    assert compressible_edges(line_tree(), translations()) == []


def test_incompressible_examples():
    assert is_incompressible(line_tree(), translations())
    assert not is_incompressible(path_tree(2), trivial_action())
    assert is_incompressible(Tree.finite([0], []), trivial_action())


def test_contraction_examples():
    for tree in (path_tree(4), Tree.finite([0, 1, 2, 3], [(0, 1), (0, 2), (0, 3)])):
        cr = contract_compressible(tree, trivial_action())
        assert cr.tree.nodes() == [min(tree.nodes())]
    star = contract_compressible(Tree.finite([0, 1, 2, 3], [(0, 1), (0, 2), (0, 3)]), trivial_action())
    assert len(star.log) == 3
    cr = contract_compressible(line_tree(), translations())
    assert cr.log == []


def test_induced_td_after_contraction():
    td = p3_td()
    cr = contract_compressible(td.tree, trivial_action())
    merged = induced_td_after_contraction(td, cr)
    assert list(merged.parts.values()) == [frozenset({0, 1, 2})]
    ident = contract_compressible(td.tree, swap_edge())
    same = induced_td_after_contraction(td, ident)
    assert same.parts == td.parts


def test_size_sequence_examples():
    assert size_sequence(line_tree(), translations(), 6).as_tuple() == (0, 1)
    assert size_sequence(path_tree(2), trivial_action()) == SizeSequence(-1, (1,))
    assert size_sequence(path_tree(3), trivial_action()) == SizeSequence(-1, (2,))
    assert str(size_sequence(line_tree(), line_action(6), 6)) == "(0, [0, 1])"


def test_compare_size_examples():
    assert compare_size(SizeSequence(0, (1,)), SizeSequence(-1, (5,))) == Order.GREATER
    assert compare_size(SizeSequence(0, (1,)), SizeSequence(0, (1,))) == Order.EQUAL
    assert compare_size(SizeSequence(0, (1, 2)), SizeSequence(0, (1, 3))) == Order.LESS
    assert compare_size(SizeSequence(0, (1, 0)), SizeSequence(0, (1,))) == Order.EQUAL


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 30))
def test_compressibility_matches_oracle(seed):
    rng = random.Random(seed)
    nodes, edges, gens = oracles.random_tree_instance(rng, 7)
    tree, act = Tree.finite(nodes, edges), oracles.perm_action(gens)
    assert sorted(compressible_edges(tree, act)) == sorted(oracles.exact_compressible(nodes, edges, gens))
    assert is_incompressible(tree, act) == oracles.exact_incompressible(nodes, edges, gens)
    assert is_incompressible(tree, act) == (not compressible_edges(tree, act))
    cr = contract_compressible(tree, act)
    assert is_incompressible(cr.tree, cr.action)


@settings(max_examples=200, deadline=None)
@given(*[st.tuples(st.integers(-3, 3), st.lists(st.integers(0, 3), max_size=4)) for _ in range(3)])
def test_compare_size_is_total_order(a, b, c):
    a, b, c = (SizeSequence(h, tuple(t)) for h, t in (a, b, c))
    assert compare_size(a, b) == Order(-compare_size(b, a))
    assert (compare_size(a, b) == Order.EQUAL) == (a == b)
    if compare_size(a, b) != Order.GREATER and compare_size(b, c) != Order.GREATER:
        assert compare_size(a, c) != Order.GREATER
