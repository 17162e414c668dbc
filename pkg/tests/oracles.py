"""Brute-force oracles on explicit vertex sets (bitmasks), written without
using the library's component machinery."""

from __future__ import annotations

import itertools
import random

import networkx as nx


def masks(n, edges):
    nb = [0] * n
    for u, v in edges:
        nb[u] |= 1 << v
        nb[v] |= 1 << u
    return nb


def bits(m):
    i = 0
    while m:
        if m & 1:
            yield i
        m >>= 1
        i += 1


def flood(nb, allowed):
    """Connected components (as masks) of the subgraph induced by ``allowed``."""
    comps = []
    left = allowed
    while left:
        low = left & -left
        comp = low
        grow = low
        while grow:
            reach = 0
            for v in bits(grow):
                reach |= nb[v]
            grow = reach & allowed & ~comp
            comp |= grow
        comps.append(comp)
        left &= ~comp
    return comps


def all_separations(n, edges, max_order):
    """Every separation (A, B) with |A ∩ B| <= max_order, as mask pairs."""
    nb = masks(n, edges)
    full = (1 << n) - 1
    for size in range(max_order + 1):
        for sub in itertools.combinations(range(n), size):
            s = sum(1 << v for v in sub)
            comps = flood(nb, full & ~s)
            for choice in itertools.product((0, 1), repeat=len(comps)):
                a = s | sum(c for c, side in zip(comps, choice) if side == 0)
                b = s | sum(c for c, side in zip(comps, choice) if side == 1)
                yield a, b


def is_separation(n, nb, a, b):
    full = (1 << n) - 1
    if a | b != full:
        return False
    only_a, only_b = a & ~b, b & ~a
    return all(not (nb[v] & only_b) for v in bits(only_a))


def is_tight(nb, a, b):
    s = a & b

    def has_full(side):
        for comp in flood(nb, side):
            if all(nb[x] & comp for x in bits(s)):
                return True
        return False

    return has_full(a & ~b) and has_full(b & ~a)


def tight_through(n, edges, v, k):
    """Tight separations with v in the separator and order <= k, by brute force
    over all 3-colourings restricted to separators containing v."""
    nb = masks(n, edges)
    out = set()
    others = [u for u in range(n) if u != v]
    for size in range(k):
        for rest in itertools.combinations(others, size):
            s = (1 << v) | sum(1 << u for u in rest)
            free = [u for u in range(n) if not s >> u & 1]
            for choice in itertools.product((0, 1), repeat=len(free)):
                a = s | sum(1 << u for u, c in zip(free, choice) if c == 0)
                b = s | sum(1 << u for u, c in zip(free, choice) if c == 1)
                if is_separation(n, nb, a, b) and is_tight(nb, a, b):
                    out.add((a, b))
    return out


def closure(n, generators):
    """Subsemiring generated by ``generators`` and the two neutral elements."""
    full = (1 << n) - 1
    elems = set(generators) | {(full, 0), (0, full)}
    frontier = list(elems)
    while frontier:
        new = []
        current = list(elems)
        for x in frontier:
            for y in current:
                for z in ((x[0] & y[0], x[1] | y[1]), (x[0] | y[0], x[1] & y[1])):
                    if z not in elems:
                        elems.add(z)
                        new.append(z)
        frontier = new
    return elems


def to_mask(vs):
    return sum(1 << v for v in vs)


def connected_graphs(max_n):
    """All connected graphs (up to isomorphism) with 1..max_n <= 7 vertices."""
    for g in nx.graph_atlas_g():
        if 0 < g.number_of_nodes() <= max_n and nx.is_connected(g):
            yield g


def random_connected(n, rng: random.Random, p=None):
    p = p if p is not None else rng.uniform(0.2, 0.6)
    while True:
        g = nx.gnp_random_graph(n, p, seed=rng.randrange(1 << 30))
        if nx.is_connected(g):
            return g


def tree_automorphisms(t: nx.Graph) -> list[dict]:
    """All automorphisms of a small tree, via networkx isomorphism search."""
    return list(nx.algorithms.isomorphism.GraphMatcher(t, t).isomorphisms_iter())


def random_tree_instance(rng: random.Random, max_n: int = 7):
    """A random tree on 1..max_n nodes with a subgroup generated by at most two
    of its automorphisms, as (nodes, edges, list of permutation dicts)."""
    n = rng.randint(1, max_n)
    t = nx.random_labeled_tree(n, seed=rng.randrange(1 << 30)) if n > 1 else nx.empty_graph(1)
    autos = tree_automorphisms(t)
    gens = [rng.choice(autos) for _ in range(rng.randint(0, 2))]
    return sorted(t.nodes()), sorted(tuple(sorted(e)) for e in t.edges()), gens


def perm_action(gens):
    """GroupAction from permutation dicts, adding inverses as needed."""
    from accessibility.graph_core import GroupAction, permutation_morphism

    out = []
    for i, p in enumerate(gens):
        inv = {b: a for a, b in p.items()}
        if inv == p:
            out.append(permutation_morphism(f"g{i}", p))
        else:
            out.append(permutation_morphism(f"g{i}", p, f"G{i}"))
            out.append(permutation_morphism(f"G{i}", inv, f"g{i}"))
    return GroupAction(out)


def orbits_and_stabilizers(nodes, edges, gens):
    """Exact orbits and stabilizers (as sets of full permutations) by closure."""
    ident = {v: v for v in nodes}
    group = {tuple(sorted(ident.items()))}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for p in gens:
                h = {v: p[g[v]] for v in nodes}
                key = tuple(sorted(h.items()))
                if key not in group:
                    group.add(key)
                    nxt.append(h)
        frontier = nxt
    group = [dict(k) for k in group]
    node_orbit = {v: frozenset(g[v] for g in group) for v in nodes}
    stab = {v: frozenset(tuple(sorted(g.items())) for g in group if g[v] == v) for v in nodes}
    return group, node_orbit, stab


def exact_compressible(nodes, edges, gens):
    """Edges between distinct orbits whose stabilizer equals an endpoint's."""
    group, orbit, stab = orbits_and_stabilizers(nodes, edges, gens)
    out = []
    for u, v in edges:
        if orbit[u] == orbit[v]:
            continue
        se = frozenset(tuple(sorted(g.items())) for g in group if {g[u], g[v]} == {u, v})
        if se == stab[u] or se == stab[v]:
            out.append((u, v))
    return out


def exact_incompressible(nodes, edges, gens):
    """No node stabilizer properly contained in another (or equal across orbits)."""
    group, orbit, stab = orbits_and_stabilizers(nodes, edges, gens)
    for u in nodes:
        for v in nodes:
            if u != v and stab[u] <= stab[v] and (stab[u] != stab[v] or orbit[u] != orbit[v]):
                return False
    return True
