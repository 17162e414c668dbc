"""Locally finite graphs behind neighbour oracles, bounded exploration, and
group actions given by generator morphisms.

Every graph exposes ``neighbors(v)``. Families whose component structure is
known in closed form also provide ``hull(S)``: a finite region ``R`` around
``S`` in which connectivity of ``G - S`` is faithfully represented, together
with a ``frontier`` subset such that a component of ``G - S`` is infinite
exactly when it meets the frontier. That is the exact finiteness oracle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .errors import BudgetError, DomainError, OracleError

Vertex = Hashable

DEFAULT_BUDGET = 12
DEFAULT_EXPLORE_CAP = 24


@dataclass(frozen=True)
class Hull:
    region: frozenset
    frontier: frozenset


class Graph:
    """A locally finite graph given by a neighbour oracle.

    Subclasses override :meth:`neighbors`, :meth:`contains` and optionally
    :meth:`hull` and :meth:`vertices` (finite graphs only).
    """

    name = "graph"
    is_finite = False
    connected = True

    def __init__(self, root: Vertex, degree_bound: int | None = None):
        self.root = root
        self.degree_bound = degree_bound
        self._structures: dict = {}

    def neighbors(self, v: Vertex) -> tuple:
        raise NotImplementedError

    def contains(self, v: Vertex) -> bool:
        return True

    def vertices(self) -> list:
        raise DomainError(f"{self.name} is infinite; use ball()")

    def hull(self, s: frozenset) -> Hull | None:
        return None

    def check(self, v: Vertex) -> Vertex:
        if not self.contains(v):
            raise DomainError(f"{v!r} is not a vertex of {self.name}")
        return v

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class FiniteGraph(Graph):
    """Finite simple graph on vertices ``0..n-1`` with optional labels."""

    is_finite = True

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], labels: Sequence | None = None,
                 name: str = "finite", root: int = 0):
        adj: list[set] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge {(u, v)} references an undeclared vertex")
            if u == v:
                raise DomainError(f"self-loop at {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        self.labels = list(labels) if labels is not None else list(range(n))
        self.name = name
        self.connected = n == 0 or _finite_connected(self._adj)
        super().__init__(root if n else None, max((len(a) for a in adj), default=0))
        self._all = frozenset(range(n))

    @classmethod
    def from_networkx(cls, g, name: str = "finite") -> "FiniteGraph":
        nodes = sorted(g.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        return cls(len(nodes), [(index[u], index[v]) for u, v in g.edges()], labels=nodes, name=name)

    def neighbors(self, v):
        try:
            return self._adj[v]
        except (IndexError, TypeError):
            raise DomainError(f"{v!r} is not a vertex of {self.name}") from None

    def contains(self, v):
        return isinstance(v, int) and 0 <= v < self.n

    def vertices(self):
        return list(range(self.n))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self._adj[u] if u < v]

    def hull(self, s):
        return Hull(self._all, frozenset())

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g


def _finite_connected(adj) -> bool:
    seen = {0}
    todo = [0]
    while todo:
        for w in adj[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(adj)


class LineGraph(Graph):
    """The double ray on the integers."""

    name = "line"

    def __init__(self):
        super().__init__(0, 2)

    def neighbors(self, v):
        return (v - 1, v + 1)

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool)

    def hull(self, s):
        lo, hi = min(s) - 2, max(s) + 2
        return Hull(frozenset(range(lo, hi + 1)), frozenset((lo, hi)))


class Grid2D(Graph):
    """The square grid Z^2 with vertices ``(x, y)``."""

    name = "grid2d"

    def __init__(self):
        super().__init__((0, 0), 4)

    def neighbors(self, v):
        x, y = v
        return ((x - 1, y), (x, y - 1), (x, y + 1), (x + 1, y))

    def contains(self, v):
        return isinstance(v, tuple) and len(v) == 2 and all(isinstance(c, int) for c in v)

    def hull(self, s):
        xs = [x for x, _ in s]
        ys = [y for _, y in s]
        x0, x1, y0, y1 = min(xs) - 2, max(xs) + 2, min(ys) - 2, max(ys) + 2
        region = frozenset((x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1))
        frontier = frozenset(v for v in region if v[0] in (x0, x1) or v[1] in (y0, y1))
        return Hull(region, frontier)


class Ladder(Graph):
    """The ladder Z x K2 with vertices ``(i, side)``, side in {0, 1}."""

    name = "ladder"

    def __init__(self):
        super().__init__((0, 0), 3)

    def neighbors(self, v):
        i, s = v
        return ((i - 1, s), (i, 1 - s), (i + 1, s))

    def contains(self, v):
        return isinstance(v, tuple) and len(v) == 2 and isinstance(v[0], int) and v[1] in (0, 1)

    def hull(self, s):
        lo, hi = min(i for i, _ in s) - 2, max(i for i, _ in s) + 2
        region = frozenset((i, b) for i in range(lo, hi + 1) for b in (0, 1))
        return Hull(region, frozenset((i, b) for i in (lo, hi) for b in (0, 1)))


class RegularTree(Graph):
    """The d-regular tree as the Cayley graph of the free product of d copies of Z/2.

    Vertices are reduced words (tuples with no two equal adjacent letters);
    the root is the empty word and ``w[:-1]`` is the parent of ``w``.
    """

    def __init__(self, d: int = 3):
        if d < 2:
            raise DomainError("regular tree needs degree >= 2")
        self.d = d
        self.name = f"tree({d})"
        super().__init__((), d)

    def neighbors(self, w):
        out = []
        for j in range(self.d):
            out.append(w[:-1] if w and w[-1] == j else w + (j,))
        return tuple(sorted(out))

    def contains(self, w):
        return (isinstance(w, tuple) and all(isinstance(j, int) and 0 <= j < self.d for j in w)
                and all(a != b for a, b in zip(w, w[1:])))

    def hull(self, s):
        words = list(s)
        lcp = words[0]
        for w in words[1:]:
            k = 0
            while k < min(len(lcp), len(w)) and lcp[k] == w[k]:
                k += 1
            lcp = lcp[:k]
        core = {w[:k] for w in words for k in range(len(lcp), len(w) + 1)}
        dist = {v: 0 for v in core}
        todo = deque(core)
        while todo:
            v = todo.popleft()
            if dist[v] == 2:
                continue
            for u in self.neighbors(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    todo.append(u)
        return Hull(frozenset(dist), frozenset(v for v, k in dist.items() if k == 2))


class OracleGraph(Graph):
    """A graph given only by a user neighbour function; no finiteness oracle."""

    def __init__(self, neighbors: Callable[[Vertex], Iterable[Vertex]], root: Vertex,
                 name: str = "oracle", degree_bound: int | None = None,
                 contains: Callable[[Vertex], bool] | None = None):
        super().__init__(root, degree_bound)
        self._nb = neighbors
        self._contains = contains
        self.name = name

    def neighbors(self, v):
        return tuple(sorted(self._nb(v)))

    def contains(self, v):
        return True if self._contains is None else self._contains(v)


# ---------------------------------------------------------------------------
# exploration


@dataclass(frozen=True)
class Ball:
    centers: tuple
    radius: int
    vertices: tuple
    edges: tuple
    boundary: tuple
    dist: dict = field(compare=False, repr=False)


def _checked_neighbors(g: Graph, v):
    nb = g.neighbors(v)
    for u in nb:
        if u == v:
            raise OracleError(f"self-loop at {v!r}")
        if v not in g.neighbors(u):
            raise OracleError(f"asymmetric neighbour lists: {u!r} in N({v!r}) but not conversely")
    return nb


def bfs_distances(g: Graph, centers: Iterable, r: int, avoid: frozenset = frozenset(),
                  check: bool = True) -> dict:
    dist = {}
    todo = deque()
    for c in centers:
        if c not in dist:
            dist[c] = 0
            todo.append(c)
    while todo:
        v = todo.popleft()
        if dist[v] == r:
            continue
        nb = _checked_neighbors(g, v) if check else g.neighbors(v)
        for u in nb:
            if u not in dist and u not in avoid:
                dist[u] = dist[v] + 1
                todo.append(u)
    return dist


def ball(g: Graph, centers: Iterable, r: int) -> Ball:
    """Closed ball of radius ``r`` around ``centers`` with sorted vertices."""
    centers = tuple(sorted(set(centers)))
    if r < 0:
        raise DomainError("radius must be >= 0")
    if not centers:
        raise DomainError("ball needs at least one center")
    for c in centers:
        g.check(c)
    dist = bfs_distances(g, centers, r)
    verts = tuple(sorted(dist))
    edges = tuple(sorted({(u, w) if u < w else (w, u)
                          for u in verts for w in g.neighbors(u) if w in dist}))
    boundary = tuple(v for v in verts if dist[v] == r)
    return Ball(centers, r, verts, edges, boundary, dist)


# ---------------------------------------------------------------------------
# components of G - S


@dataclass(frozen=True)
class Component:
    """One component of ``G - separator``, identified by its least seed vertex.

    ``verdict`` is ``"finite"``, ``"infinite"`` or ``"unknown"``; ``size`` is
    set for finite components and ``bound`` is the exploration cap for
    unknown ones.
    """

    seed: Vertex
    separator: frozenset
    verdict: str
    size: int | None = None
    bound: int | None = None

    @property
    def infinite(self) -> bool:
        return self.verdict == "infinite"


@dataclass
class ComponentStructure:
    separator: frozenset
    region: frozenset
    key_of: dict
    components: dict
    members: dict
    exact: bool


def _structure(g: Graph, s: frozenset, explore_cap: int) -> ComponentStructure:
    cache_key = (s, explore_cap)
    cached = g._structures.get(cache_key)
    if cached is not None:
        return cached
    for v in s:
        g.check(v)
    if not s:
        st = _empty_structure(g)
    else:
        hull = g.hull(s)
        st = _hull_structure(g, s, hull) if hull is not None else _capped_structure(g, s, explore_cap)
    if len(g._structures) > 50000:
        g._structures.clear()
    g._structures[cache_key] = st
    return st


def _empty_structure(g: Graph) -> ComponentStructure:
    if g.is_finite:
        verts = frozenset(g.vertices())
        comp = Component(g.root, frozenset(), "finite", size=len(verts))
        return ComponentStructure(frozenset(), verts, {v: g.root for v in verts},
                                  {g.root: comp}, {g.root: verts}, True)
    comp = Component(g.root, frozenset(), "infinite")
    return ComponentStructure(frozenset(), frozenset([g.root]), {g.root: g.root},
                              {g.root: comp}, {g.root: frozenset([g.root])}, True)


def _group_region(g: Graph, s: frozenset, region: frozenset):
    key_of = {}
    members = {}
    for start in sorted(region - s):
        if start in key_of:
            continue
        comp = {start}
        todo = [start]
        while todo:
            v = todo.pop()
            for u in g.neighbors(v):
                if u in region and u not in s and u not in comp:
                    comp.add(u)
                    todo.append(u)
        seeds = sorted(v for v in comp if any(u in s for u in g.neighbors(v)))
        key = seeds[0] if seeds else min(comp)
        fz = frozenset(comp)
        members[key] = fz
        for v in comp:
            key_of[v] = key
    return key_of, members


def _hull_structure(g: Graph, s: frozenset, hull: Hull) -> ComponentStructure:
    key_of, members = _group_region(g, s, hull.region)
    comps = {}
    for key, mem in members.items():
        if mem & hull.frontier:
            comps[key] = Component(key, s, "infinite")
        else:
            comps[key] = Component(key, s, "finite", size=len(mem))
    return ComponentStructure(s, hull.region, key_of, comps, members, True)


def _capped_structure(g: Graph, s: frozenset, cap: int) -> ComponentStructure:
    dist = bfs_distances(g, s, cap)
    region = frozenset(dist)
    key_of, members = _group_region(g, s, region)
    comps = {}
    for key, mem in members.items():
        if any(dist[v] == cap for v in mem):
            comps[key] = Component(key, s, "unknown", bound=cap)
        else:
            comps[key] = Component(key, s, "finite", size=len(mem))
    return ComponentStructure(s, region, key_of, comps, members, False)


def components_minus(g: Graph, s: Iterable, explore_cap: int = DEFAULT_EXPLORE_CAP) -> list[Component]:
    """Components of ``G - s`` adjacent to ``s`` (the root component when ``s`` is empty)."""
    st = _structure(g, frozenset(s), explore_cap)
    return [st.components[k] for k in sorted(st.components)]


def component_of(g: Graph, s: frozenset, v: Vertex, explore_cap: int = DEFAULT_EXPLORE_CAP,
                 max_steps: int = 200000) -> Vertex:
    """Key of the component of ``G - s`` containing ``v`` (``v`` not in ``s``)."""
    st = _structure(g, s, explore_cap)
    if v in s:
        raise DomainError(f"{v!r} lies in the separator")
    if not s:
        return g.root
    key = st.key_of.get(v)
    if key is not None:
        return key
    g.check(v)
    seen = {v}
    todo = deque([v])
    while todo:
        x = todo.popleft()
        for u in g.neighbors(x):
            if u in s or u in seen:
                continue
            if u in st.key_of:
                return st.key_of[u]
            seen.add(u)
            if len(seen) > max_steps:
                raise BudgetError(f"could not connect {v!r} to the region around the separator")
            todo.append(u)
    raise DomainError(f"{v!r} lies in a component not adjacent to the separator")


def component_structure(g: Graph, s: Iterable, explore_cap: int = DEFAULT_EXPLORE_CAP) -> ComponentStructure:
    return _structure(g, frozenset(s), explore_cap)


# ---------------------------------------------------------------------------
# group actions


@dataclass(frozen=True)
class GraphMorphism:
    """A vertex map evaluated lazily; ``inverse`` names the inverse generator."""

    tag: str
    fn: Callable[[Vertex], Vertex] = field(compare=False)
    inverse: str = ""

    def __call__(self, v):
        return self.fn(v)


def permutation_morphism(tag: str, perm: dict, inverse: str | None = None) -> GraphMorphism:
    perm = dict(perm)

    def fn(v):
        try:
            return perm[v]
        except KeyError:
            raise OracleError(f"{tag} undefined on {v!r}") from None

    return GraphMorphism(tag, fn, inverse or tag)


@dataclass(frozen=True)
class Element:
    """A group element as a generator word; ``word[0]`` is applied last."""

    word: tuple
    signature: tuple = field(compare=False, default=())


class GroupAction:
    """A group given by generator morphisms closed under formal inverses."""

    def __init__(self, generators: Iterable[GraphMorphism] = (), budget: int = DEFAULT_BUDGET):
        self.generators = {m.tag: m for m in generators}
        self.budget = budget
        for m in self.generators.values():
            if m.inverse not in self.generators:
                raise DomainError(f"inverse {m.inverse!r} of generator {m.tag!r} is missing")

    @property
    def tags(self) -> list[str]:
        return sorted(self.generators)

    def is_trivial(self) -> bool:
        return not self.generators

    def apply(self, word: Sequence[str], v):
        for tag in reversed(word):
            v = self.generators[tag](v)
        return v

    def inverse_word(self, word: Sequence[str]) -> tuple:
        return tuple(self.generators[t].inverse for t in reversed(word))

    def words(self, budget: int | None = None):
        """All generator words up to length ``budget`` in shortlex order."""
        budget = self.budget if budget is None else budget
        level = [()]
        yield ()
        for _ in range(budget):
            level = [(t,) + w for w in level for t in self.tags]
            yield from level

    def elements(self, probe: Sequence, budget: int | None = None, exact: bool = False,
                 limit: int = 200000) -> list[Element]:
        """Distinct elements reachable by words of length <= budget.

        Elements are told apart by their images of ``probe``. With
        ``exact=True`` the closure runs without a length bound, which is only
        meaningful when ``probe`` is a finite invariant set.
        """
        budget = self.budget if budget is None else budget
        probe = tuple(probe)
        ident = Element((), probe)
        seen = {probe: ident}
        frontier = [ident]
        depth = 0
        while frontier and (exact or depth < budget):
            depth += 1
            nxt = []
            for el in frontier:
                for tag in self.tags:
                    gen = self.generators[tag]
                    try:
                        sig = tuple(gen(x) for x in el.signature)
                    except OracleError:
                        continue
                    if sig not in seen:
                        new = Element((tag,) + el.word, sig)
                        seen[sig] = new
                        nxt.append(new)
                        if len(seen) > limit:
                            raise BudgetError(f"more than {limit} group elements within budget")
            frontier = nxt
        return list(seen.values())

    def reach(self, v, budget: int | None = None) -> dict:
        """Images of ``v`` under words of length <= budget, with a shortest word each."""
        budget = self.budget if budget is None else budget
        words = {v: ()}
        frontier = [v]
        for _ in range(budget):
            nxt = []
            for x in frontier:
                for tag in self.tags:
                    try:
                        y = self.generators[tag](x)
                    except OracleError:
                        continue
                    if y not in words:
                        words[y] = (tag,) + words[x]
                        nxt.append(y)
            frontier = nxt
        return words


def trivial_action(budget: int = DEFAULT_BUDGET) -> GroupAction:
    return GroupAction((), budget)


def check_automorphism(g: Graph, action: GroupAction, b: Ball) -> None:
    """Raise OracleError unless every generator is an automorphism on ``b``."""
    verts = b.vertices
    for tag in action.tags:
        m = action.generators[tag]
        inv = action.generators[m.inverse]
        images = {v: m(v) for v in verts}
        if len(set(images.values())) != len(images):
            raise OracleError(f"{tag} is not injective on the ball")
        for v in verts:
            if inv(images[v]) != v:
                raise OracleError(f"{m.inverse} does not invert {tag} at {v!r}")
        for u, w in b.edges:
            if images[w] not in g.neighbors(images[u]):
                raise OracleError(f"{tag} maps edge {(u, w)} to a non-edge")
        for u in verts:
            for w in verts:
                if u < w and w not in g.neighbors(u) and images[w] in g.neighbors(images[u]):
                    raise OracleError(f"{tag} maps non-edge {(u, w)} to an edge")


class _UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def classes(self) -> list[list]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return sorted((sorted(c) for c in out.values()), key=lambda c: c[0])


UnionFind = _UnionFind


def orbits_on_ball(g: Graph, action: GroupAction, b: Ball, budget: int | None = None) -> list[list]:
    """Partition of the ball: two vertices share a class when a word of length
    <= budget maps one to the other (closed transitively). This can only
    over-count true orbits."""
    uf = _UnionFind(b.vertices)
    inside = set(b.vertices)
    for v in b.vertices:
        for w in action.reach(v, budget):
            if w in inside:
                uf.union(v, w)
    return uf.classes()


# ---------------------------------------------------------------------------
# built-in families


def line_action(budget: int = DEFAULT_BUDGET, reflection: bool = True) -> GroupAction:
    gens = [GraphMorphism("t", lambda v: v + 1, "T"), GraphMorphism("T", lambda v: v - 1, "t")]
    if reflection:
        gens.append(GraphMorphism("r", lambda v: -v, "r"))
    return GroupAction(gens, budget)


def grid_action(budget: int = DEFAULT_BUDGET) -> GroupAction:
    return GroupAction([
        GraphMorphism("x", lambda v: (v[0] + 1, v[1]), "X"),
        GraphMorphism("X", lambda v: (v[0] - 1, v[1]), "x"),
        GraphMorphism("y", lambda v: (v[0], v[1] + 1), "Y"),
        GraphMorphism("Y", lambda v: (v[0], v[1] - 1), "y"),
        GraphMorphism("q", lambda v: (-v[1], v[0]), "Q"),
        GraphMorphism("Q", lambda v: (v[1], -v[0]), "q"),
    ], budget)


def ladder_action(budget: int = DEFAULT_BUDGET) -> GroupAction:
    return GroupAction([
        GraphMorphism("t", lambda v: (v[0] + 1, v[1]), "T"),
        GraphMorphism("T", lambda v: (v[0] - 1, v[1]), "t"),
        GraphMorphism("f", lambda v: (v[0], 1 - v[1]), "f"),
        GraphMorphism("r", lambda v: (-v[0], v[1]), "r"),
    ], budget)


def tree_action(d: int, budget: int = DEFAULT_BUDGET) -> GroupAction:
    def left(i):
        return lambda w: w[1:] if w and w[0] == i else (i,) + w

    return GroupAction([GraphMorphism(f"s{i}", left(i), f"s{i}") for i in range(d)], budget)


def family(name: str) -> tuple[Graph, GroupAction]:
    """Built-in family with its default action: line, grid2d, ladder, tree(d)."""
    if name == "line":
        return LineGraph(), line_action()
    if name == "grid2d":
        return Grid2D(), grid_action()
    if name == "ladder":
        return Ladder(), ladder_action()
    if name.startswith("tree"):
        inner = name[4:].strip("()") or "3"
        d = int(inner)
        return RegularTree(d), tree_action(d)
    raise DomainError(f"unknown family {name!r}")


FAMILIES = ("line", "grid2d", "ladder", "tree(3)", "tree(4)")
