import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from accessibility.errors import DomainError, NotGeneratedError, ResolutionError
from accessibility.graph_core import FiniteGraph, Grid2D, LineGraph, RegularTree, ball, family, trivial_action
from accessibility.separation import (
    Leaf,
    Plus,
    Times,
    all_separations,
    decompose_into_tight,
    distinguishes,
    elementary,
    end_proxies,
    enumerate_tight,
    evaluate,
    is_tight,
    leaves,
    make_separation,
    neutral_plus,
    neutral_times,
    plus,
    random_separation,
    semiring_violations,
    separation_by,
    separation_from_sets,
    tight_orbit_catalog,
    times,
)

LINE = LineGraph()


def window(x, r=10):
    """(A, B) restricted to the ball of radius r around the root."""
    verts = ball(x.graph, [x.graph.root], r).vertices
    return (frozenset(v for v in verts if x.in_a(v)), frozenset(v for v in verts if x.in_b(v)))


def cut(at):
    """((-inf, at], [at, inf)) on the line."""
    return separation_by(LINE, {at}, lambda v: v < at)


def interval(lo, hi, r=10):
    return frozenset(range(lo, hi + 1)) & frozenset(range(-r, r + 1))


def test_make_separation_on_line():
    x = make_separation(LINE, {0}, {-1: "A", 1: "B"})
    a, b = window(x)
    assert a == interval(-10, 0) and b == interval(0, 10)
    assert x.order == 1


def test_make_separation_needs_every_component():
    with pytest.raises(DomainError):
        make_separation(LINE, {0}, {-1: "A"})


def test_empty_separator_gives_neutrals():
    g = FiniteGraph(3, [(0, 1), (1, 2)])
    assert make_separation(g, set(), {0: "A"}) == neutral_plus(g)
    assert make_separation(g, set(), {0: "B"}) == neutral_times(g)
    assert neutral_plus(g).sets() == (frozenset({0, 1, 2}), frozenset())


def test_plus_and_times_on_line():
    x, y = cut(0), cut(5)
    assert plus(x, y) == x
    assert times(x, y) == y
    assert window(plus(x, y)) == (interval(-10, 0), interval(0, 10))


def test_neutral_and_idempotent_laws_on_line():
    x = cut(3)
    assert plus(x, neutral_plus(LINE)) == x
    assert times(x, neutral_times(LINE)) == x
    assert plus(x, x) == x and times(x, x) == x


def test_tightness_examples():
    assert is_tight(cut(0))
    v_zero = separation_by(LINE, {0}, lambda v: True)
    assert not is_tight(v_zero)
    outer = separation_by(LINE, {0, 5}, lambda v: v < 0 or v > 5)
    assert not is_tight(outer)


def test_elementary_separations():
    e = elementary(LINE, 0)
    a, b = window(e)
    assert a == {-1, 0, 1} and b == interval(-10, 10) - {0}
    k3 = FiniteGraph(3, [(0, 1), (1, 2), (0, 2)])
    assert elementary(k3, 1).order == 2
    assert elementary(RegularTree(3), ()).order == 3


def test_enumerate_tight_line_and_tree():
    seps = enumerate_tight(LINE, 0, 1, 5)
    assert len(seps) == 2
    assert {window(x) for x in seps} == {(interval(-10, 0), interval(0, 10)), (interval(0, 10), interval(-10, 0))}
    assert len(enumerate_tight(RegularTree(3), (), 1, 3)) == 6
    with pytest.raises(DomainError):
        enumerate_tight(LINE, 0, 0, 3)


def test_enumerate_tight_p3_matches_oracle():
    g = FiniteGraph(3, [(0, 1), (1, 2)])
    for v in range(3):
        got = {tuple(oracles.to_mask(s) for s in x.sets()) for x in enumerate_tight(g, v, 1, 3)}
        assert got == oracles.tight_through(3, g.edges(), v, 1)


def test_decompose_tight_is_single_leaf():
    e = decompose_into_tight(cut(0))
    assert isinstance(e, Leaf) and e.sep == cut(0)


def test_decompose_two_cuts_product():
    x = separation_by(LINE, {0, 5}, lambda v: v < 0 or v > 5)
    e = decompose_into_tight(x, search_radius=6)
    assert evaluate(e) == x
    assert isinstance(e, Times)
    tight = [y for y in leaves(e) if not y.is_neutral()]
    assert len(tight) == 2 and all(is_tight(y) and y.order == 1 for y in tight)


def test_decompose_elementary_sum():
    x = elementary(LINE, 0)
    e = decompose_into_tight(x)
    assert evaluate(e) == x
    assert isinstance(e, Plus)
    tight = [y for y in leaves(e) if not y.is_neutral()]
    assert all(is_tight(y) and y.order <= 2 for y in tight)


def test_decompose_reports_ungenerated():
    # a single vertex of P3 against everything: no tight pieces reach it
    g = FiniteGraph(3, [(0, 1), (1, 2)])
    x = separation_from_sets(g, {0, 1}, {0, 1, 2})
    with pytest.raises(NotGeneratedError):
        decompose_into_tight(x)


def test_evaluate_leaf_and_neutral():
    x = cut(2)
    assert evaluate(Leaf(x)) == x
    assert evaluate(Plus(Leaf(x), Leaf(neutral_plus(LINE)))) == x


def test_separation_from_sets_validates():
    g = FiniteGraph(3, [(0, 1), (1, 2)])
    with pytest.raises(DomainError):
        separation_from_sets(g, {0}, {2})
    with pytest.raises(DomainError):
        separation_from_sets(g, {0, 1}, {2})


def test_end_proxies():
    assert len(end_proxies(LINE, 3)) == 2
    assert len(end_proxies(Grid2D(), 3)) == 1
    assert end_proxies(FiniteGraph(3, [(0, 1), (1, 2)]), 1) == []


def test_distinguishes():
    p, q = end_proxies(LINE, 3)
    assert distinguishes(cut(0), p, q)
    assert not distinguishes(neutral_plus(LINE), p, q)
    (only,) = end_proxies(Grid2D(), 3)
    x = separation_by(Grid2D(), {(0, 0)}, lambda v: True)
    assert not distinguishes(x, only, only)
    with pytest.raises(ResolutionError):
        distinguishes(cut(7), p, q)


def test_orbit_catalogs():
    g, act = family("line")
    cat = tight_orbit_catalog(g, act, 1, 4)
    assert len(cat.classes) == 1
    p3 = FiniteGraph(3, [(0, 1), (1, 2)])
    cat = tight_orbit_catalog(p3, trivial_action(), 1, 2)
    assert all(len(c) == 1 for c in cat.classes) and cat.classes
    g, act = family("grid2d")
    assert tight_orbit_catalog(g, act, 1, 3).classes == []


def test_all_separations_matches_oracle():
    h = nx.cycle_graph(5)
    g = FiniteGraph.from_networkx(h)
    got = {tuple(oracles.to_mask(s) for s in x.sets()) for x in all_separations(g, 2)}
    assert got == set(oracles.all_separations(5, g.edges(), 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 20))
def test_semiring_laws_random(seed):
    rng = random.Random(seed)
    g = FiniteGraph.from_networkx(oracles.random_connected(rng.randint(3, 10), rng))
    xs = [random_separation(g, rng, 3) for _ in range(3)]
    assert semiring_violations(*xs) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 20))
def test_plus_times_are_set_operations(seed):
    rng = random.Random(seed)
    g = FiniteGraph.from_networkx(oracles.random_connected(rng.randint(3, 9), rng))
    x, y = random_separation(g, rng, 3), random_separation(g, rng, 3)
    (a, b), (c, d) = x.sets(), y.sets()
    assert plus(x, y).sets() == (a & c, b | d)
    assert times(x, y).sets() == (a | c, b & d)


def test_generated_exactly_when_in_brute_force_closure():
    # x decomposes iff it lies in the closure of the tight separations of order <= order(x)
    for h in oracles.connected_graphs(6):
        g = FiniteGraph.from_networkx(nx.convert_node_labels_to_integers(h))
        nb = oracles.masks(g.n, g.edges())
        seps = list(oracles.all_separations(g.n, g.edges(), 3))
        closures = {}
        for k in range(4):
            tight = [(a, b) for a, b in seps if bin(a & b).count("1") <= k and a & b and oracles.is_tight(nb, a, b)]
            closures[k] = oracles.closure(g.n, tight)
        for x in all_separations(g, 3):
            a, b = (oracles.to_mask(s) for s in x.sets())
            try:
                e = decompose_into_tight(x)
            except NotGeneratedError:
                assert (a, b) not in closures[x.order]
            else:
                assert (a, b) in closures[x.order] and evaluate(e) == x
