"""Tree-decompositions of graphs and trees acted on by groups.

Finite trees list their nodes. Lazy trees are neighbour oracles with a
declared fundamental domain: finitely many nodes and edges meeting every
orbit. All orbit and stabilizer computations on lazy trees are relative to a
word budget; on finite trees the group is closed exactly.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping

from .errors import BudgetError, DomainError, OracleError
from .graph_core import Graph, GraphMorphism, GroupAction, UnionFind, ball, component_structure
from .separation import Separation

Node = Hashable


def node_key(x):
    """Total order on mixed node labels (ints first, then by repr)."""
    if isinstance(x, bool) or not isinstance(x, int):
        return (1, 0, repr(x))
    return (0, x, "")


def edge_of(u, v) -> tuple:
    return (u, v) if node_key(u) <= node_key(v) else (v, u)


@dataclass
class Verdict:
    """Boolean result carrying a witness when false."""

    ok: bool
    witness: object = None
    reason: str = ""

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# trees


class Tree:
    """A locally finite tree. ``nodes`` given means finite."""

    def __init__(self, neighbors: Callable[[Node], Iterable[Node]], root: Node,
                 nodes: Iterable[Node] | None = None, domain: Iterable[Node] | None = None,
                 edge_domain: Iterable[tuple] | None = None,
                 bipartition: Callable[[Node], int] | None = None, name: str = "tree"):
        self._nb = neighbors
        self.root = root
        self.name = name
        self.bipartition = bipartition
        self._nodes = sorted(set(nodes), key=node_key) if nodes is not None else None
        if self._nodes is not None:
            self.domain = list(self._nodes)
            self.edge_domain = self.edges()
        else:
            if domain is None or edge_domain is None:
                raise DomainError("a lazy tree needs a declared fundamental domain")
            self.domain = sorted(set(domain), key=node_key)
            self.edge_domain = sorted({edge_of(*e) for e in edge_domain}, key=_ekey)

    @classmethod
    def finite(cls, nodes: Iterable[Node], edges: Iterable[tuple], bipartition=None,
               name: str = "tree") -> "Tree":
        nodes = list(nodes)
        adj: dict = {t: set() for t in nodes}
        for u, v in edges:
            if u not in adj or v not in adj:
                raise DomainError(f"tree edge {(u, v)} references an undeclared node")
            adj[u].add(v)
            adj[v].add(u)
        frozen = {t: tuple(sorted(n, key=node_key)) for t, n in adj.items()}

        def nb(t):
            try:
                return frozen[t]
            except KeyError:
                raise DomainError(f"{t!r} is not a tree node") from None

        root = min(nodes, key=node_key) if nodes else None
        return cls(nb, root, nodes=nodes, bipartition=bipartition, name=name)

    @property
    def is_finite(self) -> bool:
        return self._nodes is not None

    def neighbors(self, t) -> tuple:
        return tuple(self._nb(t))

    def nodes(self) -> list:
        if self._nodes is None:
            raise DomainError(f"{self.name} is infinite; use window()")
        return list(self._nodes)

    def edges(self) -> list[tuple]:
        if self._nodes is None:
            raise DomainError(f"{self.name} is infinite; use window_edges()")
        return sorted({edge_of(u, v) for u in self._nodes for v in self.neighbors(u)}, key=_ekey)

    def window(self, radius: int) -> list:
        """All nodes for finite trees, else the ball of ``radius`` around the root."""
        if self.is_finite:
            return self.nodes()
        dist = {self.root: 0}
        todo = deque([self.root])
        while todo:
            t = todo.popleft()
            if dist[t] == radius:
                continue
            for u in self.neighbors(t):
                if u not in dist:
                    dist[u] = dist[t] + 1
                    todo.append(u)
        return sorted(dist, key=node_key)

    def window_edges(self, radius: int) -> list[tuple]:
        if self.is_finite:
            return self.edges()
        inside = set(self.window(radius))
        return sorted({edge_of(u, v) for u in inside for v in self.neighbors(u) if v in inside}, key=_ekey)

    def check(self) -> None:
        """Raise DomainError unless this is a tree (finite case) with a proper bipartition."""
        if self.is_finite:
            nodes = self.nodes()
            if nodes:
                if len(self.edges()) != len(nodes) - 1 or len(self.window(len(nodes))) != len(nodes):
                    raise DomainError(f"{self.name} is not a tree")
        if self.bipartition is not None:
            for u, v in (self.edges() if self.is_finite else self.window_edges(3)):
                if self.bipartition(u) == self.bipartition(v):
                    raise DomainError(f"bipartition is not proper at edge {(u, v)}")

    def path(self, a, b, limit: int = 10_000) -> list:
        """Node path from ``a`` to ``b``."""
        prev = {a: None}
        todo = deque([a])
        while todo:
            t = todo.popleft()
            if t == b:
                out = [b]
                while prev[out[-1]] is not None:
                    out.append(prev[out[-1]])
                return out[::-1]
            for u in self.neighbors(t):
                if u not in prev:
                    prev[u] = t
                    todo.append(u)
                    if len(prev) > limit:
                        raise BudgetError(f"no path from {a!r} to {b!r} within {limit} nodes")
        raise DomainError(f"{a!r} and {b!r} are not connected")

    def side_of(self, t, edge: tuple):
        """The endpoint of ``edge`` reachable from ``t`` without using ``edge``."""
        return _edge_side(self, t, *edge)

    def __repr__(self):
        return f"<Tree {self.name}>"


def _ekey(e):
    return (node_key(e[0]), node_key(e[1]))


def line_tree() -> Tree:
    """The double ray on the integers as a lazy tree."""
    return Tree(lambda i: (i - 1, i + 1), 0, domain=[0], edge_domain=[(0, 1)],
                bipartition=lambda i: i % 2, name="line-tree")


def path_tree(n: int) -> Tree:
    return Tree.finite(range(n), [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


# ---------------------------------------------------------------------------
# tree-decompositions


class TreeDecomposition:
    """A tree with a part for each node.

    Give either ``parts`` (a dict over the nodes of a finite tree), or a
    ``part`` function together with ``candidates`` (a superset of the nodes
    whose part may contain a vertex) or ``locate`` (exactly those nodes).
    """

    def __init__(self, graph: Graph, tree: Tree, parts: Mapping | None = None,
                 part: Callable | None = None, candidates: Callable | None = None,
                 locate: Callable | None = None, adhesion: Callable | None = None,
                 adhesion_bound: int | None = None, window_radius: int = 3):
        self.graph = graph
        self.tree = tree
        self.adhesion_bound = adhesion_bound
        self.window_radius = window_radius
        self._adhesion = adhesion
        self._parts = None
        if parts is not None:
            if not tree.is_finite:
                raise DomainError("a parts dict needs a finite tree")
            self._parts = {t: frozenset(parts.get(t, ())) for t in tree.nodes()}
            index: dict = {}
            for t, p in self._parts.items():
                for v in p:
                    index.setdefault(v, set()).add(t)
            self._index = {v: frozenset(ts) for v, ts in index.items()}
            self._part = self._parts.__getitem__
            self._locate = lambda v: self._index.get(v, frozenset())
        else:
            self._part = part
            if locate is not None:
                self._locate = lambda v: frozenset(locate(v))
            elif candidates is not None and part is not None:
                self._locate = lambda v: frozenset(t for t in candidates(v) if v in self.part(t))
            else:
                raise DomainError("a lazy decomposition needs locate or candidates")
        self._cache: dict = {}

    @property
    def parts(self) -> dict:
        if self._parts is None:
            raise DomainError("parts of a lazy decomposition are evaluated per node")
        return dict(self._parts)

    def part(self, t) -> frozenset:
        if self._part is None:
            raise DomainError("parts of this decomposition are infinite; use locate()")
        if t not in self._cache:
            self._cache[t] = frozenset(self._part(t))
        return self._cache[t]

    def locate(self, v) -> frozenset:
        return self._locate(v)

    def adhesion(self, u, v) -> frozenset:
        if self._adhesion is not None:
            return frozenset(self._adhesion(u, v))
        return self.part(u) & self.part(v)

    def window(self) -> list:
        return self.tree.window(self.window_radius)

    def window_edges(self) -> list[tuple]:
        return self.tree.window_edges(self.window_radius)

    def probe(self, radius: int) -> list:
        if self.graph.is_finite:
            return self.graph.vertices()
        return ball(self.graph, [self.graph.root], radius).vertices


def td_from_separation(x: Separation) -> TreeDecomposition:
    """The two-node decomposition ``A - B`` induced by a separation."""
    g = x.graph
    tree = Tree.finite(["A", "B"], [("A", "B")], name="K2")

    def locate(v):
        return [t for t, ok in (("A", x.in_a(v)), ("B", x.in_b(v))) if ok]

    def part(t):
        if not g.is_finite:
            raise DomainError("parts of a separation are infinite; use locate()")
        a, b = x.sets()
        return a if t == "A" else b

    return TreeDecomposition(g, tree, part=part, locate=locate,
                             adhesion=lambda u, v: x.separator, adhesion_bound=x.order)


@dataclass
class Violation:
    axiom: str
    witness: tuple
    message: str


@dataclass
class TDReport:
    valid: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate_td(td: TreeDecomposition, probe_radius: int = 4) -> TDReport:
    """Check the three axioms; exhaustive for finite graphs, else on a ball.

    (T1) every vertex lies in a part; (T2) every edge lies in a part;
    (T3) the nodes whose part contains a vertex form a subtree. The first
    violation found is reported with a witness.
    """
    g = td.graph
    region = td.probe(probe_radius)
    inside = set(region)
    if td._parts is not None:
        for t, p in td._parts.items():
            for v in p:
                if not g.contains(v):
                    return TDReport(False, [Violation("T1", (t, v), f"part {t!r} holds non-vertex {v!r}")])
    for v in region:
        if not td.locate(v):
            return TDReport(False, [Violation("T1", (v,), f"vertex {v!r} lies in no part")])
    for u in region:
        for w in g.neighbors(u):
            if w in inside and node_key(u) < node_key(w) and not (td.locate(u) & td.locate(w)):
                return TDReport(False, [Violation("T2", (u, w), f"edge {(u, w)} lies in no part")])
    for v in region:
        bad = _subtree_witness(td.tree, td.locate(v))
        if bad is not None:
            t1, t2, t3 = bad
            return TDReport(False, [Violation(
                "T3", (t1, t2, t3, v),
                f"{t2!r} lies between {t1!r} and {t3!r} but its part misses {v!r}")])
    return TDReport(True)


def _subtree_witness(tree: Tree, nodes: frozenset):
    """None if ``nodes`` spans a subtree, else (t1, t2, t3) with t2 on the path outside."""
    if len(nodes) <= 1:
        return None
    order = sorted(nodes, key=node_key)
    start = order[0]
    seen = {start}
    todo = [start]
    while todo:
        t = todo.pop()
        for u in tree.neighbors(t):
            if u in nodes and u not in seen:
                seen.add(u)
                todo.append(u)
    if len(seen) == len(nodes):
        return None
    t3 = next(t for t in order if t not in seen)
    path = tree.path(start, t3)
    t2 = next(t for t in path if t not in nodes)
    return start, t2, t3


@dataclass
class AdhesionReport:
    sets: dict
    finite: bool

    @property
    def max_size(self) -> int:
        return max((len(s) for s in self.sets.values()), default=0)


def adhesion_sets(td: TreeDecomposition) -> AdhesionReport:
    """Adhesion set per (explored) tree edge; ``finite`` is vacuous for edgeless trees
    and needs a declared bound on lazy trees."""
    sets = {e: td.adhesion(*e) for e in td.window_edges()}
    if td.tree.is_finite:
        finite = True
    else:
        finite = td.adhesion_bound is not None and all(len(s) <= td.adhesion_bound for s in sets.values())
    return AdhesionReport(sets, finite)


def induced_separation(td: TreeDecomposition, edge: tuple) -> Separation:
    """``(union of parts on the side of edge[0], union on the side of edge[1])``."""
    t1, t2 = edge
    if t2 not in td.tree.neighbors(t1):
        raise DomainError(f"{edge!r} is not a tree edge")
    s = td.adhesion(t1, t2)
    if td.adhesion_bound is not None and len(s) > td.adhesion_bound:
        raise DomainError(f"adhesion at {edge!r} exceeds the declared bound")
    g = td.graph
    st = component_structure(g, s)
    a, b = set(), set()
    for key in st.components:
        home = sorted(td.locate(key), key=node_key)
        if not home:
            raise DomainError(f"vertex {key!r} lies in no part")
        side = _edge_side(td.tree, home[0], t1, t2)
        (a if side == t1 else b).add(key)
    return Separation(g, s, frozenset(a), frozenset(b))


def _edge_side(tree: Tree, t, t1, t2):
    """Which of the adjacent nodes t1, t2 is reached from ``t`` in ``T - t1t2``."""
    if t in (t1, t2):
        return t
    prev = {t}
    todo = deque([t])
    while todo:
        x = todo.popleft()
        for u in tree.neighbors(x):
            if u in prev:
                continue
            if u in (t1, t2):
                return u
            prev.add(u)
            todo.append(u)
    raise DomainError(f"{t!r} is not connected to the edge {(t1, t2)!r}")


# ---------------------------------------------------------------------------
# group actions on decompositions


def _action_elements(action: GroupAction, probe: list, finite: bool, budget: int | None):
    if finite:
        return action.elements(probe, exact=True)
    return action.elements(probe, budget)


def part_image(td: TreeDecomposition, word, action: GroupAction, t):
    """The node whose part is the image of the part of ``t``, or None."""
    image = frozenset(action.apply(word, v) for v in td.part(t))
    cands = None
    for v in image:
        here = td.locate(v)
        cands = here if cands is None else cands & here
        if not cands:
            return None, image
    for c in sorted(cands or (), key=node_key):
        if td.part(c) == image:
            return c, image
    return None, image


def is_invariant(td: TreeDecomposition, action: GroupAction, budget: int | None = None,
                 probe_radius: int = 4) -> Verdict:
    """Every element within the budget maps each explored part onto a part and
    the induced node map preserves tree adjacency."""
    g = td.graph
    probe = td.probe(probe_radius)
    try:
        els = _action_elements(action, probe, g.is_finite, budget)
    except OracleError as exc:
        return Verdict(False, None, str(exc))
    window = td.window()
    edges = td.window_edges()
    for el in els:
        image = {}
        for t in window:
            img, vs = part_image(td, el.word, action, t)
            if img is None:
                return Verdict(False, (el.word, t, sorted(vs, key=node_key)),
                               f"image of part {t!r} under {''.join(el.word) or 'id'} is not a part")
            image[t] = img
        for u, v in edges:
            if image[v] not in td.tree.neighbors(image[u]):
                return Verdict(False, (el.word, (u, v)), "induced node map breaks tree adjacency")
    return Verdict(True)


def induced_tree_action(td: TreeDecomposition, action: GroupAction) -> GroupAction:
    """The action on tree nodes induced by an invariant decomposition."""

    def lift(m: GraphMorphism):
        def fn(t):
            img, _ = part_image(td, (m.tag,), action, t)
            if img is None:
                raise OracleError(f"{m.tag} does not map part {t!r} onto a part")
            return img

        return GraphMorphism(m.tag, fn, m.inverse)

    return GroupAction([lift(action.generators[t]) for t in action.tags], action.budget)


def is_refinement(fine: TreeDecomposition, coarse: TreeDecomposition, cover,
                  probe_radius: int = 4) -> bool:
    """Contracting each fibre of ``cover`` (fine node -> coarse node) turns the
    fine tree into the coarse tree and unions fine parts into coarse parts.

    Raises DomainError when a fibre is not a subtree.
    """
    c = cover if callable(cover) else cover.__getitem__
    window = fine.window()
    fibres: dict = {}
    for t in window:
        fibres.setdefault(c(t), set()).add(t)
    for key, fib in fibres.items():
        # the window is itself a subtree, so fibres meet it in subtrees
        if _subtree_witness(fine.tree, frozenset(fib)) is not None:
            raise DomainError(f"fibre over {key!r} is not a subtree")
    seen = set()
    for u, v in fine.window_edges():
        cu, cv = c(u), c(v)
        if cu == cv:
            continue
        if cv not in coarse.tree.neighbors(cu):
            return False
        e = edge_of(cu, cv)
        if e in seen:
            return False
        seen.add(e)
    if fine.tree.is_finite and coarse.tree.is_finite:
        if set(fibres) != set(coarse.tree.nodes()) or len(seen) != len(coarse.tree.edges()):
            return False
    for v in fine.probe(probe_radius):
        if frozenset(c(t) for t in fine.locate(v)) != coarse.locate(v):
            return False
    return True



# ---------------------------------------------------------------------------
# orbits, stabilizers and compressibility


_UNDEFINED = object()


class TreeOrbits:
    """Orbit and stabilizer data of a group acting on a tree.

    Finite trees: the group is closed exactly from the generators. Lazy
    trees: elements are words of length <= budget told apart by their images
    of the domain and its neighbours; orbits are found by moving nodes into
    the fundamental domain. Stabilizers are sets of element indices.
    """

    def __init__(self, tree: Tree, action: GroupAction, budget: int | None = None):
        self.tree = tree
        self.action = action
        self.budget = action.budget if budget is None else budget
        if tree.is_finite:
            self.probe = tree.nodes()
            self.elements = action.elements(self.probe, exact=True)
        else:
            near = set(tree.domain)
            for e in tree.edge_domain:
                near.update(e)
            for t in list(near):
                near.update(tree.neighbors(t))
            self.probe = sorted(near, key=node_key)
            self.elements = action.elements(self.probe, self.budget)
        self._node_uf = UnionFind(tree.domain)
        self._edge_uf = UnionFind(tree.edge_domain)
        dom, edom = set(tree.domain), set(tree.edge_domain)
        for el in self.elements:
            for d in tree.domain:
                img = self._img(el, d)
                if img in dom:
                    self._node_uf.union(d, img)
            for e in tree.edge_domain:
                img = edge_of(*(self._img(el, t) for t in e))
                if img in edom:
                    self._edge_uf.union(e, img)
        self._orbit: dict = {}
        self._eorbit: dict = {}
        self._stab: dict = {}

    def _img(self, el, t):
        try:
            return self.action.apply(el.word, t)
        except OracleError:
            # partial morphisms (e.g. transported along a finite isomorphism)
            return _UNDEFINED

    def orbit(self, t):
        """Canonical domain representative of the orbit of ``t``."""
        if t not in self._orbit:
            if t in self._node_uf.parent:
                self._orbit[t] = self._node_uf.find(t)
            else:
                self._orbit[t] = self._node_uf.find(self._to_domain(t))
        return self._orbit[t]

    def _to_domain(self, t, limit: int = 20000):
        """A domain node in the orbit of ``t``, by breadth-first search over images."""
        seen = {t}
        todo = deque([t])
        while todo:
            x = todo.popleft()
            if x in self._node_uf.parent:
                return x
            for tag in self.action.tags:
                try:
                    y = self.action.generators[tag](x)
                except OracleError:
                    continue
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
                    if len(seen) > limit:
                        raise BudgetError(f"node {t!r} does not reach the fundamental domain")
        raise BudgetError(f"the orbit of {t!r} misses the fundamental domain")

    def edge_orbit(self, e):
        e = edge_of(*e)
        if e not in self._eorbit:
            if e in self._edge_uf.parent:
                self._eorbit[e] = self._edge_uf.find(e)
            else:
                found = None
                for el in self.elements:
                    img = edge_of(*(self._img(el, t) for t in e))
                    if img in self._edge_uf.parent:
                        found = self._edge_uf.find(img)
                        break
                if found is None:
                    raise BudgetError(f"edge {e!r} does not reach the fundamental domain within the budget")
                self._eorbit[e] = found
        return self._eorbit[e]

    def node_orbits(self) -> list:
        return sorted({self._node_uf.find(d) for d in self.tree.domain}, key=node_key)

    def edge_orbits(self) -> list:
        return sorted({self._edge_uf.find(e) for e in self.tree.edge_domain}, key=_ekey)

    def stab(self, t) -> frozenset:
        key = ("v", t)
        if key not in self._stab:
            self._stab[key] = frozenset(i for i, el in enumerate(self.elements) if self._img(el, t) == t)
        return self._stab[key]

    def edge_stab(self, e) -> frozenset:
        e = edge_of(*e)
        key = ("e", e)
        if key not in self._stab:
            target = set(e)
            self._stab[key] = frozenset(
                i for i, el in enumerate(self.elements) if {self._img(el, t) for t in e} == target)
        return self._stab[key]

    def is_compressible(self, e) -> bool:
        u, v = e
        if self.orbit(u) == self.orbit(v):
            return False
        se = self.edge_stab(e)
        return se == self.stab(u) or se == self.stab(v)


def compressible_edges(tree: Tree, action: GroupAction, budget: int | None = None) -> list[tuple]:
    """Edges ``uv`` in different vertex orbits whose stabilizer equals that of an end.

    All edges of a finite tree; the declared edge domain of a lazy tree.
    """
    orb = TreeOrbits(tree, action, budget)
    return [e for e in tree.edge_domain if orb.is_compressible(e)]


def is_incompressible(tree: Tree, action: GroupAction, budget: int | None = None,
                      radius: int = 2) -> bool:
    """For all node pairs, stabilizer inclusion forces equal stabilizers and orbits.

    Checked on all nodes of a finite tree, else on the window of ``radius``.
    """
    orb = TreeOrbits(tree, action, budget)
    nodes = tree.window(radius)
    stabs = {t: orb.stab(t) for t in nodes}
    for u in nodes:
        for v in nodes:
            if u != v and stabs[u] <= stabs[v]:
                if stabs[u] != stabs[v] or orb.orbit(u) != orb.orbit(v):
                    return False
    return True


@dataclass
class CompressionResult:
    """Contracted tree with its induced action, the node map and the log of
    contracted edge orbits (one list of representative edges per round)."""

    tree: Tree
    action: GroupAction
    c: Callable
    fiber: Callable
    log: list

    def node_map(self, nodes: Iterable) -> dict:
        return {t: self.c(t) for t in nodes}


def contract_compressible(tree: Tree, action: GroupAction, budget: int | None = None,
                          max_rounds: int = 64) -> CompressionResult:
    """Contract orbits of compressible edges, least orbit first, until none remain."""
    c = lambda t: t  # noqa: E731
    fiber = lambda t: frozenset([t])  # noqa: E731
    log: list = []
    cur_tree, cur_action = tree, action
    for _ in range(max_rounds):
        orb = TreeOrbits(cur_tree, cur_action, budget)
        comp = [e for e in cur_tree.edge_domain if orb.is_compressible(e)]
        if not comp:
            return CompressionResult(cur_tree, cur_action, c, fiber, log)
        target = min({orb.edge_orbit(e) for e in comp}, key=_ekey)
        if cur_tree.is_finite:
            step = _contract_finite(cur_tree, cur_action, orb, target)
        else:
            step = _contract_lazy(cur_tree, cur_action, orb, target)
        new_tree, new_action, c_step, fib_step, contracted = step
        log.append(contracted)
        c = _compose(c_step, c)
        fiber = _fibers(fib_step, fiber)
        cur_tree, cur_action = new_tree, new_action
    raise BudgetError(f"compression did not stabilise within {max_rounds} rounds")


def _compose(outer, inner):
    return lambda t: outer(inner(t))


def _fibers(outer, inner):
    return lambda y: frozenset().union(*(inner(z) for z in outer(y)))


def _contract_finite(tree: Tree, action: GroupAction, orb: TreeOrbits, target):
    edges = [e for e in tree.edges() if orb.edge_orbit(e) == target]
    uf = UnionFind(tree.nodes())
    for u, v in edges:
        uf.union(u, v)
    # UnionFind keeps the least element as the class root only for comparable labels
    rep = {}
    for cls in _classes(uf, tree.nodes()):
        name = min(cls, key=node_key)
        for t in cls:
            rep[t] = name
    fib: dict = {}
    for t, name in rep.items():
        fib.setdefault(name, set()).add(t)
    new_nodes = sorted(fib, key=node_key)
    new_edges = {edge_of(rep[u], rep[v]) for u, v in tree.edges() if rep[u] != rep[v]}
    new_tree = Tree.finite(new_nodes, new_edges, name=f"{tree.name}/c")
    gens = []
    for tag in action.tags:
        m = action.generators[tag]
        perm = {name: rep[m(name)] for name in new_nodes}
        gens.append(GraphMorphism(tag, perm.__getitem__, m.inverse))
    new_action = GroupAction(gens, action.budget)
    fibre = {k: frozenset(v) for k, v in fib.items()}
    return new_tree, new_action, rep.__getitem__, fibre.__getitem__, sorted(edges, key=_ekey)


def _classes(uf: UnionFind, items) -> list:
    out: dict = {}
    for x in items:
        out.setdefault(uf.find(x), []).append(x)
    return list(out.values())


def _contract_lazy(tree: Tree, action: GroupAction, orb: TreeOrbits, target):
    u, v = target
    # the absorbed endpoint has exactly one edge of the orbit; it merges into
    # its neighbour across that edge, so fibres are stars around centres
    absorbed = orb.orbit(u) if orb.edge_stab(target) == orb.stab(u) else orb.orbit(v)

    def in_orbit_edge(x, y):
        return orb.edge_orbit((x, y)) == target

    cache: dict = {}

    def center(x):
        if x not in cache:
            if orb.orbit(x) != absorbed:
                cache[x] = x
            else:
                hits = [y for y in tree.neighbors(x) if in_orbit_edge(x, y)]
                if len(hits) != 1:
                    raise BudgetError(f"node {x!r} has {len(hits)} edges in the contracted orbit")
                cache[x] = hits[0]
        return cache[x]

    def fib(y):
        return frozenset([y] + [z for z in tree.neighbors(y)
                                if orb.orbit(z) == absorbed and in_orbit_edge(y, z)])

    def neighbors(y):
        f = fib(y)
        out = []
        for z in sorted(f, key=node_key):
            for w in tree.neighbors(z):
                if w not in f:
                    cw = center(w)
                    if cw not in out:
                        out.append(cw)
        return out

    domain = {center(d) for d in tree.domain}
    edge_domain = [edge_of(center(a), center(b)) for a, b in tree.edge_domain
                   if orb.edge_orbit((a, b)) != target]
    new_tree = Tree(neighbors, center(tree.root), domain=domain, edge_domain=edge_domain,
                    name=f"{tree.name}/c")

    def lift(m):
        return GraphMorphism(m.tag, lambda y: center(m(y)), m.inverse)

    new_action = GroupAction([lift(action.generators[t]) for t in action.tags], action.budget)
    return new_tree, new_action, center, fib, [target]


def induced_td_after_contraction(td: TreeDecomposition, cr: CompressionResult) -> TreeDecomposition:
    """Parts of the contracted tree are unions of the parts in each fibre."""
    if cr.tree.is_finite:
        parts = {y: frozenset().union(*(td.part(t) for t in cr.fiber(y))) for y in cr.tree.nodes()}
        return TreeDecomposition(td.graph, cr.tree, parts=parts, window_radius=td.window_radius)

    def part(y):
        return frozenset().union(*(td.part(t) for t in cr.fiber(y)))

    return TreeDecomposition(td.graph, cr.tree, part=part,
                             locate=lambda v: {cr.c(t) for t in td.locate(v)},
                             window_radius=td.window_radius)


# ---------------------------------------------------------------------------
# size sequences


@dataclass(frozen=True)
class SizeSequence:
    """``head`` = edge orbits minus node orbits; ``tail[n-1]`` = number of edge
    orbits whose stabilizer has n elements (trailing zeros trimmed)."""

    head: int
    tail: tuple

    def __post_init__(self):
        tail = list(self.tail)
        while tail and tail[-1] == 0:
            tail.pop()
        object.__setattr__(self, "tail", tuple(tail))

    def as_tuple(self) -> tuple:
        return (self.head,) + self.tail

    def __str__(self):
        return f"({self.head}, {list(self.tail)})"


class Order(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def size_sequence(tree: Tree, action: GroupAction, budget: int | None = None,
                  kernel: int = 1) -> SizeSequence:
    """``kernel`` is the order of the subgroup acting trivially on the tree;
    stabilizers of the acting group are the tree stabilizers times it."""
    orb = TreeOrbits(tree, action, budget)
    eorbits = orb.edge_orbits()
    small = None if tree.is_finite else TreeOrbits(tree, action, max(0, orb.budget - 2))
    counts: dict = {}
    for e in eorbits:
        n = len(orb.edge_stab(e)) * kernel
        if small is not None:
            if len(small.edge_stab(e)) * kernel != n:
                raise BudgetError(f"stabilizer of {e!r} still grows at budget {orb.budget}")
        counts[n] = counts.get(n, 0) + 1
    tail = [counts.get(n, 0) for n in range(1, max(counts, default=0) + 1)]
    return SizeSequence(len(eorbits) - len(orb.node_orbits()), tuple(tail))


def compare_size(a: SizeSequence, b: SizeSequence) -> Order:
    """Lexicographic comparison with implicit trailing zeros."""
    n = max(len(a.tail), len(b.tail))
    ka = (a.head,) + a.tail + (0,) * (n - len(a.tail))
    kb = (b.head,) + b.tail + (0,) * (n - len(b.tail))
    return Order((ka > kb) - (ka < kb))
