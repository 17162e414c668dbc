"""Factorisations and processes of splittings.

A process starts from one graph and repeatedly replaces a factor by the two
factors of an amalgam that reproduces it. Reproduction is checked on rooted
balls; every accepted step must be non-trivial, of finite identification,
respect the declared actions and distinguish ends. After each step the size
sequence of the compressed connecting tree is recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher, rooted_tree_isomorphism

from .catalog import catalog_spec
from .errors import AccessibilityError, BudgetError, DomainError, OracleError, ResolutionError
from .graph_core import (
    FiniteGraph,
    Graph,
    GraphMorphism,
    GroupAction,
    ball,
    family,
)
from .separation import end_proxies
from .tree_amalg import (
    AmalgamGraph,
    AmalgamSpec,
    amalgam_distinguishes_ends,
    classify_type,
    construct_amalgam,
    corresponding_td,
    has_finite_identification,
    is_trivial,
    side_of,
)
from .tree_decomp import (
    Order,
    SizeSequence,
    Tree,
    TreeDecomposition,
    Verdict,
    compare_size,
    contract_compressible,
    induced_tree_action,
    is_invariant,
    node_key,
    part_image,
    size_sequence,
)


class StepRejected(AccessibilityError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class Factor:
    graph: Graph
    action: GroupAction
    name: str
    family: str | None = None


def factor_of_family(name: str) -> Factor:
    g, act = family(name)
    return Factor(g, act, name, name)


@dataclass
class Factorisation:
    """Current factors plus, per step, which factor was split by which spec."""

    factors: list
    structure: list = field(default_factory=list)

    def names(self) -> list[str]:
        return [f.name for f in self.factors]


@dataclass
class ProcessState:
    factorisation: Factorisation
    steps: int = 0
    sizes: list = field(default_factory=lambda: [SizeSequence(-1, ())])
    checks: list = field(default_factory=list)
    rejections: list = field(default_factory=list)
    budget: int = 10


def initial_state(factor: Factor, budget: int = 10) -> ProcessState:
    """A process at step 0: one factor, the one-node tree with size (-1, [])."""
    return ProcessState(Factorisation([factor]), budget=budget)


# ---------------------------------------------------------------------------
# rooted ball isomorphism


def _ball_nx(g: Graph, root, r: int):
    b = ball(g, [root], r)
    h = nx.Graph()
    for v in b.vertices:
        h.add_node(v, dist=b.dist[v])
    h.add_edges_from(b.edges)
    return h


def ball_isomorphism(g: Graph, g_root, h: Graph, h_root, r: int) -> dict | None:
    """A root-preserving isomorphism ``ball_g(r) -> ball_h(r)``, or None."""
    a, b = _ball_nx(g, g_root, r), _ball_nx(h, h_root, r)
    if a.number_of_nodes() != b.number_of_nodes() or a.number_of_edges() != b.number_of_edges():
        return None
    if nx.is_tree(a) and nx.is_tree(b):
        pairs = rooted_tree_isomorphism(a, g_root, b, h_root)
        return dict(pairs) if pairs else None
    gm = GraphMatcher(a, b, node_match=lambda x, y: x["dist"] == y["dist"])
    for m in gm.isomorphisms_iter():
        if m[g_root] == h_root:
            return m
    return None


def capped_radius(g: Graph, root, want: int, cap: int = 3000) -> int:
    """Largest r <= want whose ball around ``root`` has at most ``cap`` vertices."""
    r = 0
    while r < want and len(ball(g, [root], r + 1).vertices) <= cap:
        r += 1
    return r


def transported_action(action: GroupAction, iso: dict, pairs: bool = False) -> GroupAction:
    """``iso o gamma o iso^-1`` on the image of ``iso``; undefined elsewhere.

    With ``pairs`` the products of two generators are added as generators, so
    that elements preserving a decomposition only in pairs still act on it.
    """
    inv = {w: v for v, w in iso.items()}

    def lift(tag, fns, inverse):
        def fn(w):
            try:
                v = inv[w]
                for f in reversed(fns):
                    v = f(v)
                return iso[v]
            except KeyError:
                raise OracleError(f"{tag} leaves the transported ball at {w!r}") from None

        return GraphMorphism(tag, fn, inverse)

    gens = action.generators
    out = [lift(t, [gens[t]], gens[t].inverse) for t in action.tags]
    if pairs:
        for a in action.tags:
            for b in action.tags:
                ia, ib = gens[a].inverse, gens[b].inverse
                inverse = f"{ib}.{ia}" if ia and ib else None
                out.append(lift(f"{a}.{b}", [gens[a], gens[b]], inverse))
    return GroupAction(out, action.budget)


# ---------------------------------------------------------------------------
# steps


@dataclass
class StepConfig:
    radius: int = 8
    resolution: int = 4
    transport_radius: int = 10
    size_budget: int = 4


def decomposition_action(a: AmalgamGraph, factor: Factor, radius: int = 20, window: int = 2) -> GroupAction:
    """The factor's action moved onto the amalgam, keeping the generators and
    products of two generators that map every part near the root onto a part."""
    r = capped_radius(factor.graph, factor.graph.root, radius)
    iso = ball_isomorphism(factor.graph, factor.graph.root, a, a.root, r)
    if iso is None:
        raise DomainError(f"{a.name} does not reproduce {factor.name} on balls of radius {r}")
    td = corresponding_td(a)
    moved = transported_action(factor.action, iso, pairs=True)
    keep = []
    for tag in moved.tags:
        m = moved.generators[tag]
        try:
            ok = all(part_image(td, (tag,), moved, t)[0] is not None for t in td.tree.window(window))
        except OracleError:
            ok = False
        if ok:
            keep.append(m)
    tags = {m.tag for m in keep}
    return GroupAction([m for m in keep if m.inverse in tags], factor.action.budget)


def kernel_size(td: TreeDecomposition, action: GroupAction, budget: int, radius: int = 2) -> int:
    """Number of elements (words up to ``budget``, told apart on a ball) that
    fix every part of the decomposition seen in a window."""
    g = td.graph
    probe = g.vertices() if g.is_finite else ball(g, [g.root], radius).vertices
    window = td.tree.window(radius)
    els = action.elements(probe, exact=True) if g.is_finite else action.elements(probe, budget)
    count = 0
    for el in els:
        try:
            if all(frozenset(action.apply(el.word, v) for v in td.part(t)) == td.part(t) for t in window):
                count += 1
        except OracleError:
            continue
    return count


def compressed_size(a: AmalgamGraph, factor: Factor, iso: dict, budget: int) -> SizeSequence:
    """Size sequence of the compressed connecting tree under the factor's action."""
    td = corresponding_td(a)
    moved = transported_action(factor.action, iso)
    kernel = kernel_size(td, moved, budget)
    try:
        cr = contract_compressible(td.tree, induced_tree_action(td, moved), budget)
    except BudgetError:
        moved = transported_action(factor.action, iso, pairs=True)
        cr = contract_compressible(td.tree, induced_tree_action(td, moved), budget)
    return size_sequence(cr.tree, cr.action, budget, kernel=kernel)


def split_step(st: ProcessState, index: int, spec: AmalgamSpec,
               config: StepConfig | None = None) -> ProcessState:
    """Replace factor ``index`` by the factors of ``spec`` after checking it.

    Raises StepRejected naming the first failed precondition.
    """
    config = config or StepConfig()
    factors = st.factorisation.factors
    if not 0 <= index < len(factors):
        raise DomainError(f"no factor with index {index}")
    factor = factors[index]
    a = construct_amalgam(spec)
    radius = capped_radius(factor.graph, factor.graph.root, config.radius)
    iso = ball_isomorphism(factor.graph, factor.graph.root, a, a.root, radius)
    if iso is None:
        raise StepRejected(f"amalgam does not reproduce {factor.name} on balls of radius {radius}")
    if is_trivial(spec, a):
        raise StepRejected("amalgam is trivial (non-trivial violated)")
    if not has_finite_identification(a):
        raise StepRejected("identification is not finite")
    report = classify_type(spec)
    if report.kind == "Neither":
        raise StepRejected(f"amalgam does not respect the declared actions: {report.failures[:3]}")
    try:
        if not amalgam_distinguishes_ends(a, config.resolution):
            raise StepRejected("amalgam does not distinguish ends")
    except ResolutionError as exc:
        raise StepRejected(f"end distinction undecided: {exc}") from None
    wide = capped_radius(factor.graph, factor.graph.root, config.transport_radius)
    big = ball_isomorphism(factor.graph, factor.graph.root, a, a.root, wide) if wide > radius else iso
    size = compressed_size(a, factor, big, config.size_budget)
    new = [
        Factor(spec.g1, spec.action1, f"{spec.name}.g1"),
        Factor(spec.g2, spec.action2, f"{spec.name}.g2"),
    ]
    fact = Factorisation(factors[:index] + new + factors[index + 1:],
                         st.factorisation.structure + [(factor.name, spec.name, report.kind)])
    checks = st.checks + [{"factor": factor.name, "spec": spec.name, "type": report.kind,
                           "size": size.as_tuple()}]
    return replace(st, factorisation=fact, steps=st.steps + 1, sizes=st.sizes + [size], checks=checks)


# ---------------------------------------------------------------------------
# terminality


def proxy_count(g: Graph, r: int) -> tuple[int, bool]:
    """Number of end proxies at resolution r and whether any verdict was unknown."""
    warnings: list = []
    n = len(end_proxies(g, r, warnings))
    return n, bool(warnings)


def is_terminal(f: Factorisation, r: int = 4) -> Verdict:
    """Every factor has at most one end proxy at resolutions r and r+2."""
    counts = {}
    unsure = False
    for i, fac in enumerate(f.factors):
        c1, u1 = proxy_count(fac.graph, r)
        c2, u2 = proxy_count(fac.graph, r + 2)
        counts[i] = (c1, c2)
        unsure |= u1 or u2
        if c1 != c2:
            return Verdict(False, counts, f"proxy count of factor {i} flaps between resolutions")
        if c1 > 1:
            return Verdict(False, counts, f"factor {i} has {c1} end proxies")
    if unsure:
        return Verdict(False, counts, "indeterminate: some component finiteness is unknown")
    return Verdict(True, counts)


# ---------------------------------------------------------------------------
# drivers and processes


_MINIMAL = {"line": "double-ray", "ladder": "c4-rung", "tree(3)": "k1-k2", "tree(4)": "k1-k2(4)"}
_ALTERNATE = {"line": "p3-p3", "ladder": "c4-c4", "tree(3)": "star-k2", "tree(4)": "star-k2(4)"}


def _table_driver(table: dict) -> Callable:
    def driver(st: ProcessState):
        for i, fac in enumerate(st.factorisation.factors):
            if fac.family in table:
                return i, catalog_spec(table[fac.family])
        return None

    return driver


DRIVERS = {"minimal": _table_driver(_MINIMAL), "alternate": _table_driver(_ALTERNATE)}


@dataclass
class ProcessOutcome:
    kind: str  # Terminated | BudgetExceeded | Stalled
    steps: int
    state: ProcessState
    reason: str = ""

    def __bool__(self):
        return self.kind == "Terminated"


def run_process(factor: Factor, driver: Callable, budget: int = 10, r: int = 4,
                config: StepConfig | None = None) -> ProcessOutcome:
    st = initial_state(factor, budget)
    while True:
        if is_terminal(st.factorisation, r):
            return ProcessOutcome("Terminated", st.steps, st)
        if st.steps >= budget:
            return ProcessOutcome("BudgetExceeded", st.steps, st)
        choice = driver(st)
        if choice is None:
            return ProcessOutcome("Stalled", st.steps, st, "driver has no splitting to offer")
        index, spec = choice
        try:
            st = split_step(st, index, spec, config)
        except StepRejected as exc:
            key = (index, spec.name)
            if key in [k for k, _ in st.rejections]:
                return ProcessOutcome("Stalled", st.steps, st, exc.reason)
            st = replace(st, rejections=st.rejections + [(key, exc.reason)])


@dataclass
class SizeComparison:
    step: int
    before: SizeSequence
    after: SizeSequence
    order: Order

    @property
    def strict_growth(self) -> bool:
        return self.order == Order.GREATER

    @property
    def anomaly(self) -> bool:
        return self.order != Order.GREATER


def size_trace_report(st: ProcessState) -> list[SizeComparison]:
    """Consecutive comparisons of the recorded size sequences."""
    return [SizeComparison(i + 1, a, b, compare_size(b, a))
            for i, (a, b) in enumerate(zip(st.sizes, st.sizes[1:]))]


# ---------------------------------------------------------------------------
# finite complements and part enlargement


def connected_superset(g: Graph, s) -> frozenset:
    """``s`` together with shortest paths from its least vertex to the others."""
    s = sorted(s, key=node_key)
    if not s:
        raise DomainError("empty vertex set")
    out = set(s)
    base = s[0]
    for t in s[1:]:
        prev = {base: None}
        todo = [base]
        while t not in prev:
            nxt = []
            for v in todo:
                for w in g.neighbors(v):
                    if w not in prev:
                        prev[w] = v
                        nxt.append(w)
            if not nxt:
                raise DomainError(f"{t!r} is not reachable from {base!r}")
            todo = nxt
        v = t
        while v is not None:
            out.add(v)
            v = prev[v]
    return frozenset(out)


@dataclass
class Complement:
    g2: FiniteGraph
    vertices: list
    spec: AmalgamSpec | None


def nice_finite_complement(a: AmalgamGraph, u: tuple, v: tuple, phi: Callable, s_prime) -> Complement:
    """The finite graph G2 with ``G = G1 * G2``.

    ``u``, ``v`` are adjacent nodes of the connecting tree whose copies carry
    the same factor, ``phi`` an automorphism of the amalgam (on its vertex
    keys) reversing the edge uv, and ``s_prime`` a connected set of local
    vertices of the copy at ``u`` containing its adhesion set towards ``v``.
    G2 is induced by pi(S') and phi(pi(S')), or by the copies at u and v when
    S' is everything.
    """
    spec = a.spec
    side = side_of(u)
    if side_of(v) != 3 - side or v not in a.tree.neighbors(u):
        raise DomainError("u and v must be adjacent tree nodes")
    g1 = spec.graph(side)
    k0 = a.tree.label(u, v)
    s_local = spec.adhesion(side)[k0]
    s_prime = frozenset(s_prime)
    if not s_local <= s_prime or not s_prime <= set(g1.vertices()):
        raise DomainError("S' must be a set of local vertices containing the adhesion set")
    if not _connected(g1, s_prime):
        raise DomainError("S' must induce a connected subgraph")
    cu, cv = a.copy(u), a.copy(v)
    s_img = cu & cv
    try:
        if frozenset(phi(x) for x in s_img) != s_img:
            raise DomainError("phi does not fix the adhesion set (phi(S) = S fails)")
        if frozenset(phi(x) for x in cu) != cv:
            raise DomainError("phi does not reverse the tree edge uv")
    except (KeyError, OracleError):
        raise DomainError("phi is undefined on the copies at u and v") from None
    if s_prime == frozenset(g1.vertices()):
        keys = sorted(cu | cv)
    else:
        ps = {a.class_of(u, x) for x in s_prime}
        keys = sorted(ps | {phi(x) for x in ps})
    index = {k: i for i, k in enumerate(keys)}
    edges = [(index[p], index[q]) for p in keys for q in a.neighbors(p) if q in index and index[p] < index[q]]
    g2 = FiniteGraph(len(keys), edges, labels=keys, name=f"{spec.name}.complement")
    return Complement(g2, keys, _respecify(a, u, v, phi, s_prime, g2, index, k0))


def _connected(g: FiniteGraph, s: frozenset) -> bool:
    start = min(s)
    seen = {start}
    todo = [start]
    while todo:
        for w in g.neighbors(todo.pop()):
            if w in s and w not in seen:
                seen.add(w)
                todo.append(w)
    return seen == set(s)


def _respecify(a: AmalgamGraph, u, v, phi, s_prime, g2: FiniteGraph, index: dict, k0):
    """The amalgam G1 * G2 with adhesion sets the translates of S' (or of V(G1)).

    Translates of S' to the other indices are found inside the factor's
    action; returns None when some index has no such translate.
    """
    spec = a.spec
    side = side_of(u)
    g1 = spec.graph(side)
    adh = spec.adhesion(side)
    elements = spec.action(side).elements(g1.vertices(), exact=True)
    moves = {}
    for k in spec.labels(side):
        for el in elements:
            img = dict(zip(g1.vertices(), el.signature))
            if frozenset(img[x] for x in adh[k0]) == adh[k]:
                moves[k] = img
                break
        else:
            return None
    near = [a.class_of(u, y) for y in sorted(s_prime)]
    far = [phi(p) for p in near]
    adh1 = {k: sorted(moves[k][y] for y in s_prime) for k in moves}
    adh2 = {"u": [index[p] for p in near], "v": [index[p] for p in far]}
    bonding = {}
    for k, mv in moves.items():
        bonding[(k, "u")] = {mv[y]: index[p] for y, p in zip(sorted(s_prime), near)}
        bonding[(k, "v")] = {mv[y]: index[p] for y, p in zip(sorted(s_prime), far)}
    try:
        return AmalgamSpec(g1, g2, adh1, adh2, bonding, action1=spec.action(side),
                           root_vertex=spec.root_vertex if side == 1 else min(g1.vertices()),
                           name=f"{spec.name}+complement")
    except DomainError:
        return None


def enlarge_parts(td: TreeDecomposition, s, action: GroupAction, budget: int | None = None,
                  check_budget: int = 3) -> TreeDecomposition:
    """Parts enlarged so that some part contains ``s``.

    With S' a connected superset of ``s`` and T_S' the subtree spanned by the
    nodes whose parts meet S', every node t receives alpha(S') for each
    element alpha (words up to ``budget``) with t in alpha(T_S').
    Unchanged when a part already contains ``s``.
    """
    s = frozenset(s)
    g = td.graph
    common = None
    for x in s:
        common = td.locate(x) if common is None else common & td.locate(x)
    if common:
        return td
    sp = connected_superset(g, s)
    probe = g.vertices() if g.is_finite else ball(g, [g.root], 1).vertices
    els = action.elements(probe, exact=True) if g.is_finite else action.elements(probe, budget)
    extra: dict = {}
    extra_loc: dict = {}
    for el in els:
        try:
            img = frozenset(action.apply(el.word, x) for x in sp)
        except OracleError:
            continue
        span = _span(td.tree, {t for x in img for t in td.locate(x)})
        for t in span:
            extra.setdefault(t, set()).update(img)
        for x in img:
            extra_loc.setdefault(x, set()).update(span)
    if td.tree.is_finite:
        parts = {t: td.part(t) | frozenset(extra.get(t, ())) for t in td.tree.nodes()}
        out = TreeDecomposition(g, td.tree, parts=parts, window_radius=td.window_radius)
    else:
        out = TreeDecomposition(
            g, td.tree, part=lambda t: td.part(t) | frozenset(extra.get(t, ())),
            locate=lambda x: td.locate(x) | frozenset(extra_loc.get(x, ())),
            window_radius=td.window_radius)
    if not action.is_trivial() and not is_invariant(out, action, check_budget):
        raise BudgetError("enlarged parts are not invariant; raise the budget")
    return out


def _span(tree: Tree, nodes: set) -> set:
    nodes = sorted(nodes, key=node_key)
    if not nodes:
        return set()
    out = set()
    for t in nodes:
        out.update(tree.path(nodes[0], t))
    return out
