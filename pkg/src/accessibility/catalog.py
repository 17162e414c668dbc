"""Shipped amalgam descriptions and what they reproduce.

Each entry builds a fresh :class:`AmalgamSpec`; ``REPRODUCES`` names the
built-in family whose balls the amalgam matches, where there is one.
"""

from __future__ import annotations

from .errors import DomainError
from .graph_core import FiniteGraph, GroupAction, permutation_morphism, trivial_action
from .tree_amalg import AmalgamSpec, sorted_bonding


def _swap_action(pairs, n: int) -> GroupAction:
    perm = {v: v for v in range(n)}
    for a, b in pairs:
        perm[a], perm[b] = b, a
    return GroupAction([permutation_morphism("s", perm)])


def _all_bondings(adh1, adh2, rule=sorted_bonding) -> dict:
    return {(k, l): rule(adh1[k], adh2[l]) for k in adh1 for l in adh2}


def path(n: int) -> FiniteGraph:
    return FiniteGraph(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def cycle(n: int) -> FiniteGraph:
    return FiniteGraph(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def star(leaves: int) -> FiniteGraph:
    return FiniteGraph(leaves + 1, [(0, i) for i in range(1, leaves + 1)], name=f"K1,{leaves}")


def double_ray() -> AmalgamSpec:
    """P2 * P2 glued end to end: the double ray."""
    p2 = path(2)
    adh1 = {1: [0], 2: [1]}
    adh2 = {3: [0], 4: [1]}
    return AmalgamSpec(p2, p2, adh1, adh2, _all_bondings(adh1, adh2),
                       action1=_swap_action([(0, 1)], 2), action2=_swap_action([(0, 1)], 2), name="double-ray")


def p3_p3() -> AmalgamSpec:
    """P3 * P3 glued at end vertices: the double ray, subdivided."""
    p3 = path(3)
    adh1 = {1: [0], 2: [2]}
    adh2 = {3: [0], 4: [2]}
    return AmalgamSpec(p3, p3, adh1, adh2, _all_bondings(adh1, adh2),
                       action1=_swap_action([(0, 2)], 3), action2=_swap_action([(0, 2)], 3), name="p3-p3")


def self_p2() -> AmalgamSpec:
    """P2 amalgamated with itself; every tree edge joins a J-label to a non-J label."""
    p2 = path(2)
    adh1 = {1: [0], 2: [1]}
    adh2 = {3: [0], 4: [1]}
    twin = {1: 3, 2: 4}
    return AmalgamSpec(p2, p2, adh1, adh2, _all_bondings(adh1, adh2),
                       pair12={1: 4, 2: 3}, pair21={3: 2, 4: 1}, twin=twin, j={1}, name="self-p2")


def k1_k2(d: int = 3) -> AmalgamSpec:
    """Single vertices joined by edges: the d-regular tree."""
    k1 = FiniteGraph(1, [], name="K1")
    k2 = path(2)
    adh1 = {k: [0] for k in range(1, d + 1)}
    adh2 = {d + 1: [0], d + 2: [1]}
    return AmalgamSpec(k1, k2, adh1, adh2, _all_bondings(adh1, adh2),
                       action2=_swap_action([(0, 1)], 2), name=f"k1-k2({d})")


def star_k2(d: int = 3) -> AmalgamSpec:
    """Closed neighbourhoods K1,d glued along edges: the d-regular tree."""
    g1 = star(d)
    k2 = path(2)
    leaves = range(1, d + 1)
    adh1 = {k: [0, k] for k in leaves}
    adh2 = {d + 1: [0, 1], d + 2: [0, 1]}
    bonding = {}
    for k in leaves:
        bonding[(k, d + 1)] = {0: 0, k: 1}
        bonding[(k, d + 2)] = {0: 1, k: 0}
    rot = {0: 0, **{k: k % d + 1 for k in leaves}}
    act1 = GroupAction([permutation_morphism("a", rot, "A"),
                        permutation_morphism("A", {v: k for k, v in rot.items()}, "a"),
                        permutation_morphism("b", {0: 0, 1: 2, 2: 1, **{k: k for k in leaves if k > 2}})])
    return AmalgamSpec(g1, k2, adh1, adh2, bonding, action1=act1, action2=_swap_action([(0, 1)], 2),
                       name="star-k2" if d == 3 else f"star-k2({d})")


# C4 drawn as a unit square: 0=(0,0) 1=(0,1) 2=(1,1) 3=(1,0); rungs {0,1} and {3,2}
_LEFT, _RIGHT = {0: 0, 1: 1}, {3: 0, 2: 1}


def _square_reflection() -> GroupAction:
    return _swap_action([(0, 3), (1, 2)], 4)


def c4_c4() -> AmalgamSpec:
    """Squares glued along opposite rungs: the ladder."""
    c4 = cycle(4)
    adh1 = {1: [0, 1], 2: [2, 3]}
    adh2 = {3: [0, 1], 4: [2, 3]}

    def height(k):
        return _LEFT if k in (1, 3) else _RIGHT

    bonding = {}
    for k in adh1:
        for l in adh2:
            inv = {h: v for v, h in height(l).items()}
            bonding[(k, l)] = {v: inv[height(k)[v]] for v in adh1[k]}
    return AmalgamSpec(c4, c4, adh1, adh2, bonding, action1=_square_reflection(),
                       action2=_square_reflection(), name="c4-c4")


def c4_rung(perturbed: bool = False) -> AmalgamSpec:
    """Squares glued to rungs: the ladder. ``perturbed`` crosses the right-hand bondings."""
    c4 = cycle(4)
    rung = path(2)
    adh1 = {1: [0, 1], 2: [2, 3]}
    adh2 = {3: [0, 1], 4: [0, 1]}
    bonding = {}
    for l in adh2:
        bonding[(1, l)] = dict(_LEFT)
        bonding[(2, l)] = {3: 1, 2: 0} if perturbed else dict(_RIGHT)
    return AmalgamSpec(c4, rung, adh1, adh2, bonding, action1=_square_reflection(),
                       action2=trivial_action(), name="ladder-perturbed" if perturbed else "c4-rung")


def trivial_spec() -> AmalgamSpec:
    """A square with an edge glued onto one side: the square again."""
    c4 = cycle(4)
    adh1 = {1: [0, 1]}
    adh2 = {2: [0, 1]}
    return AmalgamSpec(c4, path(2), adh1, adh2, _all_bondings(adh1, adh2), name="trivial")


def subdivided_tree() -> AmalgamSpec:
    """K1,3 * K1,3 glued at leaves: the 3-regular tree with every edge subdivided."""
    s = star(3)
    adh1 = {1: [1], 2: [2], 3: [3]}
    adh2 = {4: [1], 5: [2], 6: [3]}
    rot = [permutation_morphism("a", {0: 0, 1: 2, 2: 3, 3: 1}, "A"),
           permutation_morphism("A", {0: 0, 2: 1, 3: 2, 1: 3}, "a")]
    return AmalgamSpec(s, s, adh1, adh2, _all_bondings(adh1, adh2), action1=GroupAction(rot),
                       action2=GroupAction(rot), name="subdivided-tree")


CATALOG = {
    "double-ray": double_ray,
    "p3-p3": p3_p3,
    "self-p2": self_p2,
    "k1-k2": k1_k2,
    "k1-k2(4)": lambda: k1_k2(4),
    "star-k2": star_k2,
    "star-k2(4)": lambda: star_k2(4),
    "c4-c4": c4_c4,
    "c4-rung": c4_rung,
    "ladder-perturbed": lambda: c4_rung(True),
    "trivial": trivial_spec,
    "subdivided-tree": subdivided_tree,
}

REPRODUCES = {
    "double-ray": "line",
    "p3-p3": "line",
    "self-p2": "line",
    "k1-k2": "tree(3)",
    "k1-k2(4)": "tree(4)",
    "star-k2": "tree(3)",
    "star-k2(4)": "tree(4)",
    "c4-c4": "ladder",
    "c4-rung": "ladder",
    "ladder-perturbed": "ladder",
}


def catalog_spec(name: str) -> AmalgamSpec:
    try:
        return CATALOG[name]()
    except KeyError:
        raise DomainError(f"unknown catalog spec {name!r}; known: {', '.join(CATALOG)}") from None
