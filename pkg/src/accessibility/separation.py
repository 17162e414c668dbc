"""Finite-order separations, the semiring operations on them, tightness,
enumeration of tight separations, and decomposition into tight ones.

A separation is stored as its separator ``S = A ∩ B`` together with the set
of components of ``G - S`` lying in ``A \\ B`` and the set lying in
``B \\ A``. Components are keyed by their least vertex adjacent to ``S``; for
``S = ∅`` the single component is keyed by the graph root.
"""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .errors import DomainError, NotGeneratedError, ResolutionError
from .graph_core import (
    DEFAULT_EXPLORE_CAP,
    Component,
    Graph,
    GroupAction,
    UnionFind,
    ball,
    component_of,
    component_structure,
    components_minus,
    orbits_on_ball,
)

A_SIDE, B_SIDE = "A", "B"


@dataclass(frozen=True, eq=False)
class Separation:
    graph: Graph
    separator: frozenset
    a_side: frozenset
    b_side: frozenset

    @property
    def order(self) -> int:
        return len(self.separator)

    def _key(self):
        return (self.separator, self.a_side, self.b_side)

    def __eq__(self, other):
        if not isinstance(other, Separation):
            return NotImplemented
        return self.graph is other.graph and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return (f"Separation(S={sorted(self.separator)}, A-comps={sorted(self.a_side)}, "
                f"B-comps={sorted(self.b_side)})")

    def side(self, v) -> str:
        """``"S"`` for separator vertices, else ``"A"`` or ``"B"``."""
        if v in self.separator:
            return "S"
        key = component_of(self.graph, self.separator, v)
        return A_SIDE if key in self.a_side else B_SIDE

    def in_a(self, v) -> bool:
        return self.side(v) != B_SIDE

    def in_b(self, v) -> bool:
        return self.side(v) != A_SIDE

    def reversed(self) -> "Separation":
        return Separation(self.graph, self.separator, self.b_side, self.a_side)

    def is_neutral(self) -> bool:
        return not self.separator

    def sets(self) -> tuple[frozenset, frozenset]:
        """Explicit ``(A, B)``; finite graphs only."""
        if not self.graph.is_finite:
            raise DomainError("explicit vertex sets exist only for finite graphs")
        st = component_structure(self.graph, self.separator)
        a = set(self.separator)
        b = set(self.separator)
        for key, mem in st.members.items():
            (a if key in self.a_side else b).update(mem)
        return frozenset(a), frozenset(b)

    def components(self) -> list[Component]:
        return components_minus(self.graph, self.separator)


def make_separation(g: Graph, s: Iterable, assignment: Mapping) -> Separation:
    """Separation with separator ``s`` and components sent to ``"A"``/``"B"``.

    ``assignment`` maps each component seed (as reported by
    ``components_minus``) to a side.
    """
    s = frozenset(s)
    a, b = set(), set()
    for comp in components_minus(g, s):
        side = assignment.get(comp.seed)
        if side == A_SIDE:
            a.add(comp.seed)
        elif side == B_SIDE:
            b.add(comp.seed)
        else:
            raise DomainError(f"component seeded at {comp.seed!r} has no side assignment")
    return Separation(g, s, frozenset(a), frozenset(b))


def separation_by(g: Graph, s: Iterable, in_a) -> Separation:
    """Separation whose A-side holds the components whose seed satisfies ``in_a``."""
    s = frozenset(s)
    comps = components_minus(g, s)
    return make_separation(g, s, {c.seed: A_SIDE if in_a(c.seed) else B_SIDE for c in comps})


def separation_from_sets(g: Graph, a: Iterable, b: Iterable) -> Separation:
    """Separation from explicit vertex sets of a finite graph (validated)."""
    a, b = frozenset(a), frozenset(b)
    verts = frozenset(g.vertices())
    if a | b != verts:
        raise DomainError("A ∪ B must be the whole vertex set")
    for u in a - b:
        for w in g.neighbors(u):
            if w in b - a:
                raise DomainError(f"edge {(u, w)} joins A\\B to B\\A")
    s = a & b
    st = component_structure(g, s)
    assignment = {}
    for key, mem in st.members.items():
        if mem <= a:
            assignment[key] = A_SIDE
        elif mem <= b:
            assignment[key] = B_SIDE
        else:
            raise DomainError("a component of G - S meets both sides")
    return make_separation(g, s, assignment)


def neutral_plus(g: Graph) -> Separation:
    """``(V, ∅)``."""
    return Separation(g, frozenset(), frozenset([g.root]), frozenset())


def neutral_times(g: Graph) -> Separation:
    """``(∅, V)``."""
    return Separation(g, frozenset(), frozenset(), frozenset([g.root]))


def _combine(x: Separation, y: Separation, op: str) -> Separation:
    if x.graph is not y.graph:
        raise DomainError("separations live on different graphs")
    g = x.graph
    if op == "+":
        in_a = lambda v: x.in_a(v) and y.in_a(v)  # noqa: E731
        in_b = lambda v: x.in_b(v) or y.in_b(v)  # noqa: E731
    else:
        in_a = lambda v: x.in_a(v) or y.in_a(v)  # noqa: E731
        in_b = lambda v: x.in_b(v) and y.in_b(v)  # noqa: E731
    sep = frozenset(v for v in x.separator | y.separator if in_a(v) and in_b(v))
    a, b = set(), set()
    for comp in components_minus(g, sep):
        (a if in_a(comp.seed) else b).add(comp.seed)
    return Separation(g, sep, frozenset(a), frozenset(b))


def plus(x: Separation, y: Separation) -> Separation:
    """``(A, B) + (C, D) = (A ∩ C, B ∪ D)``."""
    return _combine(x, y, "+")


def times(x: Separation, y: Separation) -> Separation:
    """``(A, B) × (C, D) = (A ∪ C, B ∩ D)``."""
    return _combine(x, y, "×")


def _adjacent_components(x: Separation) -> dict:
    """separator vertex -> keys of components of G - S it has neighbours in."""
    g = x.graph
    st = component_structure(g, x.separator)
    out = {}
    for s in x.separator:
        out[s] = {st.key_of[u] for u in g.neighbors(s) if u not in x.separator}
    return out


def full_components(x: Separation) -> set:
    """Components of ``G - S`` whose neighbourhood contains all of ``S``."""
    st = component_structure(x.graph, x.separator)
    full = set(st.components)
    for keys in _adjacent_components(x).values():
        full &= keys
    return full


def is_tight(x: Separation) -> bool:
    full = full_components(x)
    return bool(full & x.a_side) and bool(full & x.b_side)


def elementary(g: Graph, x) -> Separation:
    """``({x} ∪ N(x), V \\ {x})``."""
    g.check(x)
    return separation_by(g, g.neighbors(x), lambda v: v == x)


def enumerate_tight(g: Graph, v, k: int, search_radius: int) -> list[Separation]:
    """All tight separations with ``v`` in the separator, order <= k and
    separator inside ``ball(v, search_radius)``. Complete only relative to the
    radius."""
    if k < 1:
        raise DomainError("order bound must be >= 1")
    pool = [u for u in ball(g, [v], search_radius).vertices if u != v]
    found = []
    for size in range(k):
        for rest in itertools.combinations(pool, size):
            s = frozenset((v,) + rest)
            found.extend(_tight_with_separator(g, s))
    return found


def _tight_with_separator(g: Graph, s: frozenset) -> Iterator[Separation]:
    comps = [c.seed for c in components_minus(g, s)]
    probe = Separation(g, s, frozenset(), frozenset(comps))
    full = full_components(probe)
    if len(full) < 2:
        return
    for mask in range(1 << len(comps)):
        a = frozenset(c for i, c in enumerate(comps) if mask >> i & 1)
        b = frozenset(comps) - a
        if a & full and b & full:
            yield Separation(g, s, a, b)


# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Leaf:
    sep: Separation


@dataclass(frozen=True)
class Plus:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Times:
    left: "Expression"
    right: "Expression"


Expression = Union[Leaf, Plus, Times]


def evaluate(e: Expression) -> Separation:
    if isinstance(e, Leaf):
        return e.sep
    if isinstance(e, Plus):
        return plus(evaluate(e.left), evaluate(e.right))
    if isinstance(e, Times):
        return times(evaluate(e.left), evaluate(e.right))
    raise DomainError(f"not an expression: {e!r}")


def leaves(e: Expression) -> list[Separation]:
    if isinstance(e, Leaf):
        return [e.sep]
    return leaves(e.left) + leaves(e.right)


def _fold(node, parts: list[Expression]) -> Expression:
    out = parts[0]
    for p in parts[1:]:
        out = node(out, p)
    return out


# finite graphs are immutable, so their generator pools are shared between runs
_FINITE_POOLS: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


class _Decomposer:
    def __init__(self, x: Separation, search_radius: int = 2):
        self.g = x.graph
        self.guard = 2 * (x.order + 1)
        self.search_radius = search_radius
        self._pools: dict = _FINITE_POOLS.setdefault(self.g, {}) if self.g.is_finite else {}

    def run(self, x: Separation, depth: int = 0) -> Expression:
        if depth > self.guard:
            raise RuntimeError(f"decomposition depth guard exceeded at {x!r}")
        if x.is_neutral() or is_tight(x):
            return Leaf(x)
        g = self.g
        s = x.separator
        st = component_structure(g, s)
        adj = _adjacent_components(x)
        nbhd = {key: frozenset(t for t in s if key in adj[t]) for key in st.components}
        full = {key for key, n in nbhd.items() if n == s}
        # Product case: A\B is nonempty and no component of it sees all of S.
        if x.a_side and not (x.a_side & full):
            ks = sorted(x.a_side)
            rest = s - frozenset().union(*(nbhd[c] for c in ks))
            factors = [self._degenerate(rest, A_SIDE, depth)]
            for c in ks:
                factors.append(self.run(self._isolate(c, nbhd[c], A_SIDE), depth + 1))
            return _fold(Times, factors)
        if x.b_side and not (x.b_side & full):
            ks = sorted(x.b_side)
            rest = s - frozenset().union(*(nbhd[c] for c in ks))
            terms = [self._degenerate(rest, B_SIDE, depth)]
            for c in ks:
                terms.append(self.run(self._isolate(c, nbhd[c], B_SIDE), depth + 1))
            return _fold(Plus, terms)
        # One side is empty: x = (S, V) or (V, S).
        return self._degenerate(s, A_SIDE if not x.a_side else B_SIDE, depth)

    def _isolate(self, key, n: frozenset, side: str) -> Separation:
        """``(C ∪ N(C), V \\ C)`` for side A, ``(V \\ C, C ∪ N(C))`` for side B."""
        st = component_structure(self.g, n)
        # C stays a component of G - N(C); its seed is adjacent to N(C).
        inner = st.key_of[key]
        others = frozenset(st.components) - {inner}
        if side == A_SIDE:
            return Separation(self.g, n, frozenset([inner]), others)
        return Separation(self.g, n, others, frozenset([inner]))

    def _degenerate(self, s: frozenset, empty_side: str, depth: int) -> Expression:
        """``(s, V)`` when ``empty_side`` is A, ``(V, s)`` when it is B."""
        g = self.g
        comps = sorted(component_structure(g, s).components)
        if not s:
            return Leaf(neutral_times(g) if empty_side == A_SIDE else neutral_plus(g))
        if len(comps) >= 2:
            c0 = frozenset(comps[:1])
            z = Separation(g, s, c0, frozenset(comps) - c0)
            pair = [self.run(z, depth + 1), self.run(z.reversed(), depth + 1)]
            # (P,Q) + (Q,P) = (P∩Q, V) and (P,Q) × (Q,P) = (V, P∩Q).
            return (Plus if empty_side == A_SIDE else Times)(*pair)
        x = Separation(g, s, frozenset(), frozenset(comps))
        if empty_side == B_SIDE:
            x = x.reversed()
        return self.lattice(x, len(s))

    def pool(self, near: frozenset, n: int) -> list[Separation]:
        """Tight separations of order <= n with separator close to ``near``."""
        g = self.g
        if g.is_finite:
            centers, radius = g.vertices(), 0
        else:
            centers, radius = sorted(near), self.search_radius
        key = (frozenset(centers), radius, n)
        if key not in self._pools:
            out, seen = [], set()
            for v in ball(g, centers, radius).vertices:
                for t in enumerate_tight(g, v, n, n if g.is_finite else self.search_radius):
                    if t not in seen:
                        seen.add(t)
                        out.append(t)
            self._pools[key] = out
        return self._pools[key]

    def _sets(self, t: Separation) -> tuple[frozenset, frozenset]:
        key = ("sets", t)
        if key not in self._pools:
            self._pools[key] = t.sets()
        return self._pools[key]

    def lattice(self, x: Separation, n: int) -> Expression:
        """Join of meets of tight separations, found vertex by vertex.

        Separations under + and × form a distributive lattice with + as meet.
        ``x`` lies in the sublattice generated by a pool T iff every v in A is
        in the A-part of the meet of {t in T : v in A_t}, that meet lies below
        x, and dually every w outside B is handled by the meet of
        {t in T : w not in B_t}. The conditions are monotone in the chosen
        subset, so prefixes of a distance-sorted pool suffice.
        """
        g = self.g
        st = component_structure(g, x.separator)
        if all(st.components[k].verdict == "finite" for k in x.a_side):
            dual = False
        elif all(st.components[k].verdict == "finite" for k in x.b_side):
            dual = True
            x = x.reversed()
        else:
            raise NotGeneratedError(f"{x!r}: both sides infinite and the recursion failed")
        inner = frozenset().union(*(st.members[k] for k in x.a_side)) if x.a_side else frozenset()
        pool = self.pool(x.separator | inner, n)
        if dual:
            pool = [t.reversed() for t in pool]
        terms = []
        for v in sorted(x.separator | inner):
            terms.append(self._meet_below(x, self._candidates(pool, (n, dual), "a", v), v))
        for w in sorted(inner):
            terms.append(self._meet_below(x, self._candidates(pool, (n, dual), "b", w), w))
        uniq = []
        for t in terms:
            if t not in uniq:
                uniq.append(t)
        expr = _fold(Times, [_fold(Plus, [Leaf(t) for t in ts]) for ts in uniq]) if uniq \
            else Leaf(neutral_times(g))
        return _dualize(expr) if dual else expr

    def _candidates(self, pool: list, tag: tuple, kind: str, v) -> list[Separation]:
        """Pool members with v in A (kind "a") or v outside B (kind "b"), those
        with v in the separator first, then by order."""
        key = ("cands", tag, kind, v)
        if self.g.is_finite and key in self._pools:
            return self._pools[key]
        if kind == "a":
            cands = [t for t in pool if t.in_a(v)]
        else:
            cands = [t for t in pool if not t.in_b(v)]
        cands.sort(key=lambda t: (v not in t.separator, t.order, _ordkey(t)))
        if self.g.is_finite:
            self._pools[key] = cands
        return cands

    def _meet_below(self, x: Separation, cands: list[Separation], v) -> tuple:
        chosen = []
        if self.g.is_finite:
            # the meet is (intersection of the A's, union of the B's); it lies below x
            # iff its A is inside x's A and its B contains x's B
            xa, xb = x.sets()
            ma, mb = None, frozenset()
            for t in cands:
                chosen.append(t)
                ta, tb = self._sets(t)
                ma = ta if ma is None else ma & ta
                mb = mb | tb
                if ma <= xa and xb <= mb:
                    return tuple(chosen)
            raise NotGeneratedError(f"{x!r} is not generated by tight separations (vertex {v!r})")
        meet = None
        for t in cands:
            chosen.append(t)
            meet = t if meet is None else plus(meet, t)
            if plus(meet, x) == meet:
                return tuple(chosen)
        raise NotGeneratedError(f"{x!r} is not generated by tight separations (vertex {v!r})")


def _ordkey(t: Separation):
    return (sorted(t.separator), sorted(t.a_side), sorted(t.b_side))


def _dualize(e: Expression) -> Expression:
    if isinstance(e, Leaf):
        return Leaf(e.sep.reversed())
    if isinstance(e, Plus):
        return Times(_dualize(e.left), _dualize(e.right))
    return Plus(_dualize(e.left), _dualize(e.right))


def decompose_into_tight(x: Separation, search_radius: int = 2) -> Expression:
    """Expression over tight separations of order <= order(x) (plus the two
    neutral elements as constants) that evaluates to ``x``.

    Non-tight separations are split exactly as in the inductive argument: a
    product over the components of A\\B when none of them sees the whole
    separator, otherwise a sum over the components of B\\A. Factors of the
    shape ``(X, V)`` or ``(V, Y)`` fall outside that argument and are handled
    by :meth:`_Decomposer.lattice`; on infinite graphs the generator pool is
    limited to separators within ``search_radius`` of the input.

    Raises NotGeneratedError when no such expression exists (exact on finite
    graphs).
    """
    dec = _Decomposer(x, search_radius)
    try:
        return dec.run(x)
    except NotGeneratedError:
        if x.is_neutral():
            raise
        return dec.lattice(x, x.order)


# ---------------------------------------------------------------------------
# ends and distinction


@dataclass(frozen=True)
class EndProxy:
    radius: int
    component: Component

    @property
    def seed(self):
        return self.component.seed


def end_proxies(g: Graph, r: int, warnings: list | None = None,
                explore_cap: int = DEFAULT_EXPLORE_CAP) -> list[EndProxy]:
    """Infinite components of ``G - ball(root, r)``."""
    b = ball(g, [g.root], r)
    out = []
    for comp in components_minus(g, b.vertices, explore_cap):
        if comp.infinite:
            out.append(EndProxy(r, comp))
        elif comp.verdict == "unknown" and warnings is not None:
            warnings.append(f"component at {comp.seed!r} still growing beyond radius {comp.bound}")
    return out


def distinguishes(x: Separation, p: EndProxy, q: EndProxy) -> bool:
    if p.radius != q.radius:
        raise ResolutionError("proxies at different resolutions")
    g = x.graph
    inside = ball(g, [g.root], p.radius).dist
    if not x.separator <= inside.keys():
        raise ResolutionError(f"separator leaves ball of radius {p.radius}; refine the resolution")
    return {x.side(p.seed), x.side(q.seed)} == {A_SIDE, B_SIDE}


# ---------------------------------------------------------------------------
# group action on separations


def apply_word(x: Separation, action: GroupAction, word) -> Separation:
    g = x.graph
    s = frozenset(action.apply(word, v) for v in x.separator)
    if not x.separator:
        return x
    a = frozenset(component_of(g, s, action.apply(word, k)) for k in x.a_side)
    b = frozenset(component_of(g, s, action.apply(word, k)) for k in x.b_side)
    return Separation(g, s, a, b)


@dataclass
class OrbitCatalog:
    representatives: list
    action: GroupAction
    budget: int
    order_bound: int
    classes: list = field(default_factory=list)
    probe: tuple = ()

    def witness(self, x: Separation):
        """``(representative, word)`` with ``word(rep) == x`` within budget, else None."""
        for el in self.action.elements(self.probe, self.budget):
            for rep in self.representatives:
                if rep.order == x.order and apply_word(rep, self.action, el.word) == x:
                    return rep, el.word
        return None


def tight_orbit_catalog(g: Graph, action: GroupAction, n: int, radius: int,
                        budget: int | None = None) -> OrbitCatalog:
    """Tight separations of order <= n through one vertex per vertex class,
    grouped into classes under words of length <= budget."""
    budget = action.budget if budget is None else budget
    b = ball(g, [g.root], radius)
    reps = []
    for cls in orbits_on_ball(g, action, b, budget):
        reps.append(g.root if g.root in cls else cls[0])
    seps = []
    seen = set()
    for v in reps:
        for x in enumerate_tight(g, v, n, radius):
            if x not in seen:
                seen.add(x)
                seps.append(x)
    index = {x: i for i, x in enumerate(seps)}
    uf = UnionFind(range(len(seps)))
    probe = ball(g, [g.root], 1).vertices
    elements = action.elements(probe, budget)
    for i, x in enumerate(seps):
        for el in elements:
            j = index.get(apply_word(x, action, el.word))
            if j is not None:
                uf.union(i, j)
    classes = [[seps[i] for i in cls] for cls in uf.classes()]
    return OrbitCatalog([c[0] for c in classes], action, budget, n, classes, probe)


# ---------------------------------------------------------------------------
# finite enumeration and the axiom suite


def all_separations(g: Graph, k: int) -> Iterator[Separation]:
    """Every separation of order <= k of a finite connected graph."""
    if not g.is_finite:
        raise DomainError("exhaustive enumeration needs a finite graph")
    verts = g.vertices()
    for size in range(min(k, len(verts)) + 1):
        for s in itertools.combinations(verts, size):
            s = frozenset(s)
            seeds = [c.seed for c in components_minus(g, s)]
            for choice in itertools.product((A_SIDE, B_SIDE), repeat=len(seeds)):
                a = frozenset(x for x, c in zip(seeds, choice) if c == A_SIDE)
                yield Separation(g, s, a, frozenset(seeds) - a)


def random_separation(g: Graph, rng, max_order: int) -> Separation:
    """A separation of a finite graph with a uniformly drawn separator size."""
    verts = g.vertices()
    s = frozenset(rng.sample(verts, rng.randint(0, min(max_order, len(verts)))))
    seeds = [c.seed for c in components_minus(g, s)]
    a = frozenset(x for x in seeds if rng.random() < 0.5)
    return Separation(g, s, a, frozenset(seeds) - a)


def semiring_violations(x: Separation, y: Separation, z: Separation) -> list[str]:
    """Names of the semiring laws failing on the triple (exact equality)."""
    g = x.graph
    zero, one = neutral_plus(g), neutral_times(g)
    laws = {
        "plus-associative": plus(plus(x, y), z) == plus(x, plus(y, z)),
        "times-associative": times(times(x, y), z) == times(x, times(y, z)),
        "plus-commutative": plus(x, y) == plus(y, x),
        "times-commutative": times(x, y) == times(y, x),
        "times-distributes": times(x, plus(y, z)) == plus(times(x, y), times(x, z)),
        "plus-distributes": plus(x, times(y, z)) == times(plus(x, y), plus(x, z)),
        "plus-neutral": plus(x, zero) == x,
        "times-neutral": times(x, one) == x,
    }
    return [name for name, ok in laws.items() if not ok]
