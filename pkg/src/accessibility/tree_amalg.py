"""Tree amalgamation of two finite graphs over a semiregular tree.

A node of the connecting tree is a token: the sequence of edge labels read
from the root, which lies in V1. A node in V1 carries a copy of ``g1``, a
node in V2 a copy of ``g2``. The edge from a child back to its parent is
labelled by the pairing map applied to the parent's outgoing label; the
remaining outgoing labels enumerate the rest of the index set in sorted
order. Vertices of the amalgam are classes of pairs ``(token, x)`` under
the bonding edges, keyed by their least member.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import BudgetError, DomainError, ResolutionError, SpecError
from .graph_core import FiniteGraph, Graph, GroupAction, Hull, ball, check_automorphism, trivial_action
from .separation import distinguishes, end_proxies
from .tree_decomp import Tree, TreeDecomposition, induced_separation, node_key

IDENT_CAP = 10_000


@dataclass
class AmalgamSpec:
    """Input data of a tree amalgamation.

    ``bonding[(k, l)]`` maps ``adhesion1[k]`` onto ``adhesion2[l]`` for every
    k in I1 and l in I2. ``pair12``/``pair21`` choose the label at the far
    end of an edge (default: least label of the other index set). For the
    self-amalgam variant give ``twin`` (a bijection I1 -> I2 identifying the
    two copies of one index set) and ``j`` (a subset of I1).
    """

    g1: FiniteGraph
    g2: FiniteGraph
    adhesion1: Mapping
    adhesion2: Mapping
    bonding: Mapping
    action1: GroupAction = field(default_factory=trivial_action)
    action2: GroupAction = field(default_factory=trivial_action)
    pair12: Mapping | None = None
    pair21: Mapping | None = None
    twin: Mapping | None = None
    j: frozenset | None = None
    root_vertex: int = 0
    name: str = "amalgam"

    def __post_init__(self):
        self.adhesion1 = {k: frozenset(v) for k, v in self.adhesion1.items()}
        self.adhesion2 = {k: frozenset(v) for k, v in self.adhesion2.items()}
        self.i1 = sorted(self.adhesion1, key=node_key)
        self.i2 = sorted(self.adhesion2, key=node_key)
        if self.pair12 is None:
            self.pair12 = {k: self.i2[0] for k in self.i1} if self.i2 else {}
        if self.pair21 is None:
            self.pair21 = {l: self.i1[0] for l in self.i2} if self.i1 else {}
        self.bonding = {kl: dict(m) for kl, m in self.bonding.items()}
        if self.j is not None:
            self.j = frozenset(self.j)
        self.validate()

    @property
    def p1(self) -> int:
        return len(self.i1)

    @property
    def p2(self) -> int:
        return len(self.i2)

    @property
    def adhesion_size(self) -> int:
        return len(next(iter(self.adhesion1.values())))

    def graph(self, side: int) -> FiniteGraph:
        return self.g1 if side == 1 else self.g2

    def adhesion(self, side: int) -> dict:
        return self.adhesion1 if side == 1 else self.adhesion2

    def action(self, side: int) -> GroupAction:
        return self.action1 if side == 1 else self.action2

    def labels(self, side: int) -> list:
        return self.i1 if side == 1 else self.i2

    def phi(self, k, l) -> dict:
        """Bonding map from the adhesion set labelled k to the one labelled l."""
        if (k, l) in self.bonding:
            return self.bonding[(k, l)]
        if (l, k) in self.bonding:
            return {y: x for x, y in self.bonding[(l, k)].items()}
        raise SpecError(f"no bonding map between {k!r} and {l!r}")

    def validate(self) -> None:
        if not self.i1 or not self.i2:
            raise SpecError("both index sets must be nonempty")
        if set(self.i1) & set(self.i2):
            raise SpecError("index sets I1 and I2 must be disjoint")
        sizes = {len(s) for s in list(self.adhesion1.values()) + list(self.adhesion2.values())}
        if len(sizes) != 1:
            raise SpecError(f"adhesion sets have different cardinalities {sorted(sizes)}")
        if sizes == {0}:
            raise SpecError("adhesion sets must be nonempty")
        for side in (1, 2):
            g = self.graph(side)
            if not g.connected:
                raise SpecError(f"factor g{side} is not connected")
            for k, s in self.adhesion(side).items():
                if not all(g.contains(v) for v in s):
                    raise SpecError(f"adhesion set {k!r} of g{side} has non-vertices")
            check_automorphism(g, self.action(side), ball(g, g.vertices(), 0))
        for k in self.i1:
            for l in self.i2:
                m = self.bonding.get((k, l))
                if m is None:
                    raise SpecError(f"bonding map ({k!r}, {l!r}) is missing")
                if set(m) != self.adhesion1[k] or set(m.values()) != self.adhesion2[l] \
                        or len(set(m.values())) != len(m):
                    raise SpecError(f"bonding map ({k!r}, {l!r}) is not a bijection S_k -> S_l")
        if set(self.pair12) != set(self.i1) or not set(self.pair12.values()) <= set(self.i2):
            raise SpecError("pair12 must map I1 into I2")
        if set(self.pair21) != set(self.i2) or not set(self.pair21.values()) <= set(self.i1):
            raise SpecError("pair21 must map I2 into I1")
        if not self.g1.contains(self.root_vertex):
            raise SpecError("root vertex is not a vertex of g1")
        if self.twin is not None:
            if set(self.twin) != set(self.i1) or sorted(self.twin.values(), key=node_key) != self.i2:
                raise SpecError("twin must be a bijection I1 -> I2")
            if self.j is None or not self.j <= set(self.i1):
                raise SpecError("self-amalgam data needs j, a subset of I1")


def sorted_bonding(s: Iterable, t: Iterable) -> dict:
    """The bijection matching the i-th least element of ``s`` with that of ``t``."""
    return dict(zip(sorted(s), sorted(t)))


# ---------------------------------------------------------------------------
# connecting tree


def side_of(token: tuple) -> int:
    return 1 if len(token) % 2 == 0 else 2


class ConnectingTree:
    """The (|I1|, |I2|)-semiregular tree with its canonical labelling f."""

    def __init__(self, spec: AmalgamSpec):
        self.spec = spec
        self.finite = min(spec.p1, spec.p2) <= 1

    def back(self, token: tuple):
        """Label at ``token`` of the edge towards the parent."""
        if not token:
            return None
        if side_of(token) == 2:
            return self.spec.pair12[token[-1]]
        return self.spec.pair21[token[-1]]

    def out_labels(self, token: tuple) -> list:
        b = self.back(token)
        return [k for k in self.spec.labels(side_of(token)) if k != b]

    def label(self, token: tuple, other: tuple):
        """f of the directed edge token -> other."""
        if other == token[:-1] and token:
            return self.back(token)
        if other[:-1] == token:
            return other[-1]
        raise DomainError(f"{token!r} and {other!r} are not adjacent")

    def neighbors(self, token: tuple) -> list:
        out = [token[:-1]] if token else []
        out.extend(token + (k,) for k in self.out_labels(token))
        return out

    def valid(self, token) -> bool:
        if not isinstance(token, tuple):
            return False
        for i in range(len(token)):
            if token[i] not in self.out_labels(token[:i]):
                return False
        return True

    def all_tokens(self) -> list:
        if not self.finite:
            raise DomainError("the connecting tree is infinite")
        out, todo = [], [()]
        while todo:
            t = todo.pop()
            out.append(t)
            todo.extend(t + (k,) for k in self.out_labels(t))
        return sorted(out)

    def path(self, a: tuple, b: tuple) -> list:
        n = 0
        while n < min(len(a), len(b)) and a[n] == b[n]:
            n += 1
        up = [a[:i] for i in range(len(a), n - 1, -1)]
        down = [b[:i] for i in range(n + 1, len(b) + 1)]
        return up + down

    def as_tree(self) -> Tree:
        if self.finite:
            toks = self.all_tokens()
            return Tree.finite(toks, [(t[:-1], t) for t in toks if t], bipartition=lambda t: len(t) % 2,
                               name=f"T({self.spec.p1},{self.spec.p2})")
        root_edges = [((), (k,)) for k in self.out_labels(())]
        domain = [()] + [(k,) for k in self.out_labels(())]
        return Tree(self.neighbors, (), domain=domain, edge_domain=root_edges,
                    bipartition=lambda t: len(t) % 2, name=f"T({self.spec.p1},{self.spec.p2})")


# ---------------------------------------------------------------------------
# the amalgam


@dataclass(frozen=True)
class IdentificationRecord:
    key: tuple
    support: tuple
    size: int


class AmalgamGraph(Graph):
    """``(G1 + G2) / F`` behind a neighbour oracle; vertices are class keys."""

    def __init__(self, spec: AmalgamSpec, cap: int = IDENT_CAP):
        self.spec = spec
        self.tree = ConnectingTree(spec)
        self.cap = cap
        self.is_finite = self.tree.finite
        self.name = spec.name
        self._key: dict = {}
        self._members: dict = {}
        self._nb: dict = {}
        super().__init__(None)
        self.root = self.class_of((), spec.root_vertex)

    # -- classes --------------------------------------------------------
    def _bond_partners(self, token: tuple, x):
        spec = self.spec
        side = side_of(token)
        for k, s in spec.adhesion(side).items():
            if x not in s:
                continue
            if k == self.tree.back(token):
                other = token[:-1]
                l = token[-1]
            else:
                other = token + (k,)
                l = self.tree.back(other)
            yield other, spec.phi(k, l)[x]

    def class_of(self, token: tuple, x) -> tuple:
        """Key of the class of ``x`` in the copy at ``token``."""
        if (token, x) in self._key:
            return self._key[(token, x)]
        seen = {(token, x)}
        todo = [(token, x)]
        while todo:
            t, y = todo.pop()
            for pair in self._bond_partners(t, y):
                if pair not in seen:
                    seen.add(pair)
                    todo.append(pair)
                    if len(seen) > self.cap:
                        raise BudgetError(f"identification class of {(token, x)!r} exceeds {self.cap}")
        key = min(seen)
        members = frozenset(seen)
        for m in members:
            self._key[m] = key
        self._members[key] = members
        return key

    def members(self, key: tuple) -> frozenset:
        if key not in self._members:
            self.class_of(*key)
        return self._members[key]

    def support(self, key: tuple) -> frozenset:
        return frozenset(t for t, _ in self.members(key))

    def copy(self, token: tuple) -> frozenset:
        """pi(V(G_token))."""
        g = self.spec.graph(side_of(token))
        return frozenset(self.class_of(token, x) for x in g.vertices())

    # -- graph interface -------------------------------------------------
    def contains(self, v) -> bool:
        if not (isinstance(v, tuple) and len(v) == 2 and self.tree.valid(v[0])):
            return False
        if not self.spec.graph(side_of(v[0])).contains(v[1]):
            return False
        return self.class_of(*v) == v

    def neighbors(self, v) -> tuple:
        if v not in self._nb:
            if not self.contains(v):
                raise DomainError(f"{v!r} is not a vertex of {self.name}")
            out = set()
            for t, x in self.members(v):
                g = self.spec.graph(side_of(t))
                for y in g.neighbors(x):
                    w = self.class_of(t, y)
                    if w != v:
                        out.add(w)
            self._nb[v] = tuple(sorted(out))
        return self._nb[v]

    def vertices(self) -> list:
        if not self.is_finite:
            raise DomainError(f"{self.name} is infinite; use ball()")
        return sorted({k for t in self.tree.all_tokens() for k in self.copy(t)})

    def hull(self, s: frozenset) -> Hull:
        """Region over the subtree spanned by the supports of ``s`` plus one layer.

        A component of G - S is infinite iff it has a vertex in a copy outside
        that subtree: each branch beyond it is an infinite connected graph
        avoiding S.
        """
        if self.is_finite:
            return Hull(frozenset(self.vertices()), frozenset())
        core = set()
        for v in s:
            core |= self.support(v)
        if not core:
            core = {()}
        base = min(core)
        span = set()
        for t in core:
            span.update(self.tree.path(base, t))
        layer = {u for t in span for u in self.tree.neighbors(t)} - span
        region = set()
        frontier = set()
        for t in span | layer:
            for key in self.copy(t):
                region.add(key)
                if not self.support(key) <= span:
                    frontier.add(key)
        return Hull(frozenset(region), frozenset(frontier))


def construct_amalgam(spec: AmalgamSpec, cap: int = IDENT_CAP) -> AmalgamGraph:
    return AmalgamGraph(spec, cap)


def identification(a: AmalgamGraph, x) -> IdentificationRecord:
    sup = tuple(sorted(a.support(x)))
    return IdentificationRecord(x, sup, len(sup))


def has_finite_identification(a: AmalgamGraph, bound: int | None = None, radius: int = 2) -> bool:
    """Identification sizes over the copies within ``radius`` of the root node
    stay within ``bound`` (or merely finite under the closure cap)."""
    toks = a.tree.as_tree().window(radius)
    try:
        sizes = [len(a.support(k)) for t in toks for k in a.copy(t)]
    except BudgetError:
        return False
    return bound is None or max(sizes) <= bound


def is_trivial(spec: AmalgamSpec, a: AmalgamGraph | None = None) -> bool:
    """Some copy is mapped bijectively onto the whole amalgam.

    An infinite amalgam of finite factors is never trivial. For finite ones
    every copy is tested.
    """
    a = a or AmalgamGraph(spec)
    if not a.is_finite:
        return False
    total = len(a.vertices())
    for t in a.tree.all_tokens():
        g = spec.graph(side_of(t))
        if g.n == total and len(a.copy(t)) == g.n:
            return True
    return False


def trivial_by_remark(spec: AmalgamSpec) -> bool:
    """The sufficient condition: one side has a single index whose adhesion set is the whole factor."""
    for side in (1, 2):
        labels = spec.labels(side)
        if len(labels) == 1 and spec.adhesion(side)[labels[0]] == frozenset(spec.graph(side).vertices()):
            return True
    return False


# ---------------------------------------------------------------------------
# respecting the actions


def _closure(action: GroupAction, g: FiniteGraph, budget: int | None):
    probe = g.vertices()
    if budget is None:
        return action.elements(probe, exact=True)
    return action.elements(probe, budget)


def _perm(g: FiniteGraph, el) -> dict:
    return dict(zip(g.vertices(), el.signature))


@dataclass
class RespectWitness:
    side: int
    gamma: tuple
    permutation: dict
    choices: dict


def respects_check(spec: AmalgamSpec, side: int, gamma, budget: int | None = None):
    """Witness that the amalgam respects ``gamma`` (a word in the side's action), or None.

    Searches permutations of the side's index set, partner indices l and
    elements tau of the other side's action fixing S_l setwise (all elements
    when ``budget`` is None, else words up to that length).
    """
    other = 3 - side
    g, h = spec.graph(side), spec.graph(other)
    act = spec.action(side)
    img = {x: act.apply(gamma, x) for x in g.vertices()}
    adh, adh_o = spec.adhesion(side), spec.adhesion(other)
    taus = [(el.word, _perm(h, el)) for el in _closure(spec.action(other), h, budget)]
    options: dict = {}
    for k in spec.labels(side):
        sk = adh[k]
        moved = frozenset(img[x] for x in sk)
        options[k] = []
        for k2 in spec.labels(side):
            if adh[k2] != moved:
                continue
            found = None
            for l in spec.labels(other):
                a, b = spec.phi(k, l), spec.phi(k2, l)
                for word, tau in taus:
                    if frozenset(tau[y] for y in adh_o[l]) != adh_o[l]:
                        continue
                    if all(a[x] == tau[b[img[x]]] for x in sk):
                        found = (l, word)
                        break
                if found:
                    break
            if found:
                options[k].append((k2, found))
    labels = spec.labels(side)
    assignment = _match(labels, options)
    if assignment is None:
        return None
    return RespectWitness(side, tuple(gamma), {k: v[0] for k, v in assignment.items()},
                          {k: v[1] for k, v in assignment.items()})


def _match(labels, options):
    """A choice per label with pairwise distinct targets (backtracking)."""
    out: dict = {}
    used: set = set()

    def go(i):
        if i == len(labels):
            return True
        k = labels[i]
        for k2, data in options[k]:
            if k2 not in used:
                used.add(k2)
                out[k] = (k2, data)
                if go(i + 1):
                    return True
                used.discard(k2)
                del out[k]
        return False

    return dict(out) if go(0) else None


def consistency_check(spec: AmalgamSpec, k, l, l2, budget: int | None = None):
    """A word gamma of the action on the side of l, l2 with phi_kl = gamma o phi_kl2, or None."""
    side = 1 if l in spec.i1 else 2
    if (k in spec.i1) == (side == 1) or (l2 in spec.i1) != (side == 1):
        raise DomainError("k must lie in one index set and l, l2 in the other")
    h = spec.graph(side)
    a, b = spec.phi(k, l), spec.phi(k, l2)
    for el in _closure(spec.action(side), h, budget):
        gam = _perm(h, el)
        if all(a[x] == gam[b[x]] for x in a):
            return el.word
    return None


@dataclass
class TypeReport:
    kind: str
    respects: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    consistency: dict = field(default_factory=dict)
    type2: dict = field(default_factory=dict)


def _respect_all(spec: AmalgamSpec, budget: int, report: TypeReport) -> bool:
    ok = True
    for side in (1, 2):
        g = spec.graph(side)
        for el in spec.action(side).elements(g.vertices(), budget):
            w = respects_check(spec, side, el.word)
            report.respects[(side, el.word)] = w
            if w is None:
                ok = False
                report.failures.append(("respects", side, el.word))
    return ok


def _consistent(spec: AmalgamSpec, ks, ls, report: TypeReport, tag: str) -> bool:
    ok = True
    for k in ks:
        for l in ls:
            for l2 in ls:
                w = consistency_check(spec, k, l, l2)
                report.consistency[(tag, k, l, l2)] = w
                if w is None:
                    ok = False
                    report.failures.append((tag, k, l, l2))
    return ok


def f_j_condition(spec: AmalgamSpec):
    """Witness edge where ``f(e) in J iff f(reverse e) not in J`` fails, else None.

    Labels in I2 are read through the inverse of ``twin``.
    """
    back = {v: k for k, v in spec.twin.items()}
    for k in spec.i1:
        if (k in spec.j) == (back[spec.pair12[k]] in spec.j):
            return (k, spec.pair12[k])
    for l in spec.i2:
        if (back[l] in spec.j) == (spec.pair21[l] in spec.j):
            return (l, spec.pair21[l])
    return None


def classify_type(spec: AmalgamSpec, budget: int = 6) -> TypeReport:
    """Type1, Type2 or Neither, checking every element reached by words up to ``budget``.

    Respecting the actions is tested per element with exact searches inside the
    finite factors; consistency uses exact closures of the finite factor groups.
    """
    report = TypeReport("Neither")
    respects = _respect_all(spec, budget, report)
    cons1 = _consistent(spec, spec.i1, spec.i2, report, "I1-I2")
    if respects and cons1:
        report.kind = "Type1"
        return report
    if spec.twin is not None:
        same = spec.g1.edges() == spec.g2.edges() and spec.g1.n == spec.g2.n
        same_action = spec.action1.tags == spec.action2.tags and all(
            [spec.action1.apply((t,), x) for x in spec.g1.vertices()]
            == [spec.action2.apply((t,), x) for x in spec.g2.vertices()] for t in spec.action1.tags)
        bad_edge = f_j_condition(spec)
        rest = [spec.twin[k] for k in spec.i1 if k not in spec.j]
        cons2 = _consistent(spec, sorted(spec.j, key=node_key), rest, report, "J-I\\J")
        report.type2 = {"same_graph": same, "same_action": same_action, "f_j_violation": bad_edge,
                        "consistent": cons2}
        if same and same_action and bad_edge is None and respects and cons2:
            report.kind = "Type2"
    return report


# ---------------------------------------------------------------------------
# decomposition and ends


def corresponding_td(a: AmalgamGraph) -> TreeDecomposition:
    """Parts pi(V(G_u)) over the connecting tree; locate(v) is the support of v."""
    return TreeDecomposition(a, a.tree.as_tree(), part=a.copy, locate=a.support,
                             adhesion_bound=a.spec.adhesion_size)


def amalgam_distinguishes_ends(a: AmalgamGraph, r: int, tree_radius: int = 3) -> bool:
    """Some induced separation over the explored tree separates two end proxies."""
    proxies = end_proxies(a, r)
    if len(proxies) < 2:
        return False
    td = corresponding_td(a)
    tried = False
    for e in td.tree.window_edges(tree_radius):
        x = induced_separation(td, e)
        for p, q in itertools.combinations(proxies, 2):
            try:
                if distinguishes(x, p, q):
                    return True
                tried = True
            except ResolutionError:
                continue
    if not tried:
        raise ResolutionError(f"no adhesion set lies inside the ball of radius {r}")
    return False
