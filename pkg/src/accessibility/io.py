"""JSON documents, DOT export and run reports.

Vertices of finite graphs appear in documents by label; vertices of the
built-in families (ints, coordinate pairs, words) and amalgam class keys are
written as nested JSON arrays and read back as tuples.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .catalog import CATALOG, catalog_spec
from .errors import DomainError, OracleError, ParseError
from .graph_core import (
    Ball,
    FiniteGraph,
    Graph,
    GraphMorphism,
    GroupAction,
    Grid2D,
    Ladder,
    LineGraph,
    RegularTree,
    ball,
    check_automorphism,
    family,
    permutation_morphism,
    trivial_action,
)
from .separation import Expression, Leaf, Plus, Separation, Times, make_separation
from .tree_amalg import AmalgamGraph, AmalgamSpec, construct_amalgam
from .tree_decomp import Tree, TreeDecomposition, node_key

PLUS, TIMES = "+", "×"


# ---------------------------------------------------------------------------
# schemas


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("accessibility").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


def validate_document(doc, schema_name: str) -> None:
    """Raise ParseError with a JSON pointer on the first schema violation."""
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        raise ParseError(err.message, pointer)


def _load(text_or_doc):
    if isinstance(text_or_doc, (dict, list)):
        return text_or_doc
    if isinstance(text_or_doc, bytes):
        text_or_doc = text_or_doc.decode("utf-8")
    try:
        return json.loads(text_or_doc)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from None


# ---------------------------------------------------------------------------
# vertices


def encode_vertex(v):
    if isinstance(v, tuple):
        return [encode_vertex(x) for x in v]
    return v


def decode_vertex(v):
    if isinstance(v, list):
        return tuple(decode_vertex(x) for x in v)
    return v


def vertex_out(g: Graph, v):
    return g.labels[v] if isinstance(g, FiniteGraph) else encode_vertex(v)


def vertex_in(g: Graph, v):
    if isinstance(g, FiniteGraph):
        index = {lab: i for i, lab in enumerate(g.labels)}
        if v not in index:
            raise DomainError(f"{v!r} is not a vertex label of {g.name}")
        return index[v]
    v = decode_vertex(v)
    if not g.contains(v):
        raise DomainError(f"{v!r} is not a vertex of {g.name}")
    return v


# ---------------------------------------------------------------------------
# graphs


def _with_inverses(gens: list[tuple[str, object, str | None, object]]) -> GroupAction:
    """``gens`` holds (name, fn, inverse name, inverse fn); missing inverses get a primed name."""
    out = []
    names = {g[0] for g in gens}
    for name, fn, inv_name, inv_fn in gens:
        if inv_name is None:
            inv_name = name + "'"
            out.append(GraphMorphism(inv_name, inv_fn, name))
        elif inv_name not in names and inv_name != name:
            out.append(GraphMorphism(inv_name, inv_fn, name))
        out.append(GraphMorphism(name, fn, inv_name))
    return GroupAction(out)


def _finite_generators(g: FiniteGraph, gens: list) -> GroupAction:
    specs = []
    for i, gen in enumerate(gens):
        if "map" not in gen:
            raise ParseError("finite generators need an explicit map", f"/generators/{i}")
        perm = {v: v for v in g.vertices()}
        for a, b in gen["map"]:
            perm[vertex_in(g, a)] = vertex_in(g, b)
        if sorted(perm.values()) != g.vertices():
            raise DomainError(f"generator {gen['name']} is not a bijection")
        inv = {b: a for a, b in perm.items()}
        involution = inv == perm
        inv_name = gen.get("inverse") or (gen["name"] if involution else None)
        specs.append((gen["name"], permutation_morphism(gen["name"], perm).fn, inv_name,
                      permutation_morphism(gen["name"], inv).fn))
    return _with_inverses(specs)


def _symbolic(kind: str, gen: dict, where: str):
    t = gen.get("type")
    by = gen.get("by")
    axis = gen.get("axis", 0)
    if kind == "line":
        if t == "translation" and isinstance(by, int):
            return (lambda v: v + by), (lambda v: v - by), False
        if t == "reflection":
            return (lambda v: axis - v), (lambda v: axis - v), True
    if kind in ("grid2d", "ladder"):
        if t == "translation" and isinstance(by, list):
            dx, dy = by
            if kind == "ladder" and dy:
                raise ParseError("ladder translations are horizontal", where)
            return (lambda v: (v[0] + dx, v[1] + dy)), (lambda v: (v[0] - dx, v[1] - dy)), False
        if t == "reflection":
            return (lambda v: (axis - v[0], v[1])), (lambda v: (axis - v[0], v[1])), True
        if t == "flip":
            top = 1 if kind == "ladder" else 0
            return (lambda v: (v[0], top - v[1])), (lambda v: (v[0], top - v[1])), True
        if t == "rotation" and kind == "grid2d":
            return (lambda v: (-v[1], v[0])), (lambda v: (v[1], -v[0])), False
    raise ParseError(f"generator type {t!r} is not available on {kind}", where)


def parse_graph_document(text_or_doc, base: Path | None = None) -> tuple[Graph, GroupAction]:
    """Graph and declared action from a graph document; generators are checked
    to be automorphisms (on the whole graph, or on a ball for families)."""
    doc = _load(text_or_doc)
    validate_document(doc, "graph.v1.json")
    kind = doc["kind"]
    gens = doc.get("generators")
    if kind == "finite":
        labels = doc["vertices"]
        if len(set(map(json.dumps, labels))) != len(labels):
            raise ParseError("duplicate vertex labels", "/vertices")
        index = {lab: i for i, lab in enumerate(labels)}
        edges = []
        for i, (a, b) in enumerate(doc["edges"]):
            if a not in index or b not in index:
                raise ParseError(f"edge ({a!r}, {b!r}) references an undeclared vertex", f"/edges/{i}")
            edges.append((index[a], index[b]))
        root = index.get(doc.get("root", labels[0] if labels else None), 0)
        g = FiniteGraph(len(labels), edges, labels=labels, name=doc.get("name", "finite"), root=root)
        action = _finite_generators(g, gens) if gens else trivial_action()
        probe = ball(g, g.vertices(), 0) if g.n else None
    elif kind == "amalgam-ref":
        spec = resolve_spec(doc["spec"], base)
        g = construct_amalgam(spec)
        if gens:
            raise ParseError("amalgam references take no generators", "/generators")
        return g, trivial_action()
    else:
        name = f"tree({doc['degree']})" if kind == "tree" else kind
        g, action = family(name)
        if gens:
            if kind == "tree":
                raise ParseError("the regular tree only supports its default generators", "/generators")
            specs = []
            for i, gen in enumerate(gens):
                fn, inv, invol = _symbolic(kind, gen, f"/generators/{i}")
                inv_name = gen.get("inverse") or (gen["name"] if invol else None)
                specs.append((gen["name"], fn, inv_name, inv))
            action = _with_inverses(specs)
        probe = ball(g, [g.root], 3)
    if probe is not None:
        try:
            check_automorphism(g, action, probe)
        except OracleError as exc:
            raise DomainError(f"generator is not an automorphism: {exc}") from None
    return g, action


def serialize_graph(g: Graph, action: GroupAction | None = None) -> dict:
    """Document for a finite graph (with its generator maps) or a built-in family."""
    if isinstance(g, FiniteGraph):
        doc = {"version": 1, "kind": "finite", "name": g.name, "vertices": list(g.labels),
               "edges": [[g.labels[u], g.labels[v]] for u, v in g.edges()], "root": g.labels[g.root]}
        if action is not None and action.tags:
            gens = []
            for tag in action.tags:
                m = action.generators[tag]
                pairs = [[g.labels[v], g.labels[m(v)]] for v in g.vertices() if m(v) != v]
                gens.append({"name": tag, "inverse": m.inverse, "map": pairs})
            doc["generators"] = gens
        return doc
    if isinstance(g, LineGraph):
        return {"version": 1, "kind": "line"}
    if isinstance(g, Grid2D):
        return {"version": 1, "kind": "grid2d"}
    if isinstance(g, Ladder):
        return {"version": 1, "kind": "ladder"}
    if isinstance(g, RegularTree):
        return {"version": 1, "kind": "tree", "degree": g.d}
    if isinstance(g, AmalgamGraph):
        return {"version": 1, "kind": "amalgam-ref", "spec": serialize_spec(g.spec)}
    raise DomainError(f"no document form for {g!r}")


def load_graph(arg: str, base: Path | None = None) -> tuple[Graph, GroupAction]:
    """A family name, a catalog spec name, or a path to a graph document."""
    path = Path(arg)
    if base is not None and not path.is_absolute():
        path = base / path
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise DomainError(f"no such file: {arg}")
        return parse_graph_document(path.read_text(encoding="utf-8"), path.parent)
    if arg in CATALOG:
        return construct_amalgam(catalog_spec(arg)), trivial_action()
    return family(arg)


# ---------------------------------------------------------------------------
# amalgam specs


def parse_amalgam_document(text_or_doc, base: Path | None = None) -> AmalgamSpec:
    doc = _load(text_or_doc)
    validate_document(doc, "amalgam.v1.json")
    g1, a1 = parse_graph_document(doc["g1"], base)
    g2, a2 = parse_graph_document(doc["g2"], base)

    def adh(g, items, where):
        out = {}
        for i, item in enumerate(items):
            if item["label"] in out:
                raise ParseError(f"duplicate adhesion label {item['label']!r}", f"{where}/{i}")
            out[item["label"]] = [vertex_in(g, v) for v in item["vertices"]]
        return out

    adh1 = adh(g1, doc["adhesion1"], "/adhesion1")
    adh2 = adh(g2, doc["adhesion2"], "/adhesion2")
    bonding = {}
    for b in doc["bonding"]:
        bonding[(b["k"], b["l"])] = {vertex_in(g1, x): vertex_in(g2, y) for x, y in b["pairs"]}
    opt = {}
    for key in ("pair12", "pair21", "twin"):
        if key in doc:
            opt[key] = {a: b for a, b in doc[key]}
    if "j" in doc:
        opt["j"] = frozenset(doc["j"])
    if "root_vertex" in doc:
        opt["root_vertex"] = vertex_in(g1, doc["root_vertex"])
    return AmalgamSpec(g1, g2, adh1, adh2, bonding, action1=a1, action2=a2,
                       name=doc.get("name", "amalgam"), **opt)


def serialize_spec(spec: AmalgamSpec) -> dict:
    g1, g2 = spec.g1, spec.g2
    doc = {
        "version": 1,
        "name": spec.name,
        "g1": serialize_graph(g1, spec.action1),
        "g2": serialize_graph(g2, spec.action2),
        "adhesion1": [{"label": k, "vertices": [g1.labels[v] for v in sorted(spec.adhesion1[k])]}
                      for k in spec.i1],
        "adhesion2": [{"label": l, "vertices": [g2.labels[v] for v in sorted(spec.adhesion2[l])]}
                      for l in spec.i2],
        "bonding": [{"k": k, "l": l, "pairs": [[g1.labels[x], g2.labels[y]]
                                               for x, y in sorted(spec.bonding[(k, l)].items())]}
                    for (k, l) in sorted(spec.bonding, key=lambda kl: (node_key(kl[0]), node_key(kl[1])))],
        "pair12": [[k, spec.pair12[k]] for k in spec.i1],
        "pair21": [[l, spec.pair21[l]] for l in spec.i2],
        "root_vertex": g1.labels[spec.root_vertex],
    }
    if spec.twin is not None:
        doc["twin"] = [[k, spec.twin[k]] for k in sorted(spec.twin, key=node_key)]
    if spec.j is not None:
        doc["j"] = sorted(spec.j, key=node_key)
    return doc


def resolve_spec(ref, base: Path | None = None) -> AmalgamSpec:
    """A catalog name, a path to a spec document, or an inline document."""
    if isinstance(ref, dict):
        return parse_amalgam_document(ref, base)
    if ref in CATALOG:
        return catalog_spec(ref)
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    if not path.exists():
        raise DomainError(f"{ref!r} is neither a catalog spec nor a file")
    return parse_amalgam_document(path.read_text(encoding="utf-8"), path.parent)


# ---------------------------------------------------------------------------
# process scripts


@dataclass
class ProcessScript:
    graph: Graph
    action: GroupAction
    steps: list
    budget: int = 10
    resolution: int = 4


def parse_process_document(text_or_doc, base: Path | None = None) -> ProcessScript:
    doc = _load(text_or_doc)
    validate_document(doc, "process.v1.json")
    g, action = parse_graph_document(doc["graph"], base)
    steps = [(s["factor"], resolve_spec(s["spec"], base)) for s in doc["steps"]]
    return ProcessScript(g, action, steps, doc.get("budget", 10), doc.get("resolution", 4))


def script_driver(steps: list):
    """Driver replaying a fixed list of (factor index, spec) steps."""

    def driver(st):
        return steps[st.steps] if st.steps < len(steps) else None

    return driver


# ---------------------------------------------------------------------------
# separations, expressions, decompositions


def separation_to_doc(x: Separation) -> dict:
    g = x.graph
    out = [vertex_out(g, v) for v in sorted(x.separator, key=node_key)]
    return {"separator": out,
            "a": [vertex_out(g, v) for v in sorted(x.a_side, key=node_key)],
            "b": [vertex_out(g, v) for v in sorted(x.b_side, key=node_key)]}


def separation_from_doc(g: Graph, doc: dict) -> Separation:
    """Separator plus the seeds of the components on each side."""
    s = [vertex_in(g, v) for v in doc.get("separator", [])]
    assignment = {vertex_in(g, v): "A" for v in doc.get("a", [])}
    assignment.update({vertex_in(g, v): "B" for v in doc.get("b", [])})
    return make_separation(g, s, assignment)


def expression_to_doc(e: Expression):
    if isinstance(e, Leaf):
        return separation_to_doc(e.sep)
    op = PLUS if isinstance(e, Plus) else TIMES
    return [op, expression_to_doc(e.left), expression_to_doc(e.right)]


def expression_from_doc(g: Graph, doc) -> Expression:
    if isinstance(doc, dict):
        return Leaf(separation_from_doc(g, doc))
    if not (isinstance(doc, list) and len(doc) == 3 and doc[0] in (PLUS, TIMES)):
        raise ParseError(f"not an expression: {doc!r}")
    cls = Plus if doc[0] == PLUS else Times
    return cls(expression_from_doc(g, doc[1]), expression_from_doc(g, doc[2]))


def td_to_doc(td: TreeDecomposition) -> dict:
    """Tree edges and part lists; lazy trees are cut to their window."""
    nodes = td.window()
    edges = td.window_edges()
    g = td.graph
    return {
        "nodes": [encode_vertex(t) for t in nodes],
        "edges": [[encode_vertex(u), encode_vertex(v)] for u, v in edges],
        "parts": [[encode_vertex(t), [vertex_out(g, v) for v in sorted(td.part(t), key=node_key)]]
                  for t in nodes],
        "complete": td.tree.is_finite,
    }


def td_from_doc(g: Graph, doc: dict) -> TreeDecomposition:
    nodes = [decode_vertex(t) for t in doc["nodes"]]
    edges = [(decode_vertex(u), decode_vertex(v)) for u, v in doc["edges"]]
    parts = {decode_vertex(t): frozenset(vertex_in(g, v) for v in vs) for t, vs in doc["parts"]}
    return TreeDecomposition(g, Tree.finite(nodes, edges), parts=parts)


# ---------------------------------------------------------------------------
# DOT


def _q(x) -> str:
    s = x if isinstance(x, str) else json.dumps(encode_vertex(x), ensure_ascii=False)
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(obj, graph: Graph | None = None) -> str:
    """DOT text for a ball, a finite graph, a tree, a decomposition or an expression."""
    lines = []
    if isinstance(obj, Ball):
        lines.append("graph ball {")
        for v in sorted(obj.vertices, key=node_key):
            lines.append(f"  {_q(v)} [label={_q(str(v))}];")
        for u, v in sorted(obj.edges, key=lambda e: (node_key(e[0]), node_key(e[1]))):
            lines.append(f"  {_q(u)} -- {_q(v)};")
    elif isinstance(obj, FiniteGraph):
        lines.append(f"graph {_q(obj.name)} {{")
        for v in obj.vertices():
            lines.append(f"  {v} [label={_q(str(obj.labels[v]))}];")
        for u, v in obj.edges():
            lines.append(f"  {u} -- {v};")
    elif isinstance(obj, TreeDecomposition):
        lines.append("graph td {")
        g = obj.graph
        for t in obj.window():
            part = ", ".join(str(vertex_out(g, v)) for v in sorted(obj.part(t), key=node_key))
            lines.append(f"  {_q(t)} [shape=box, label={_q(f'{t}: {{{part}}}')}];")
        for u, v in obj.window_edges():
            lines.append(f"  {_q(u)} -- {_q(v)};")
    elif isinstance(obj, Tree):
        lines.append(f"graph {_q(obj.name)} {{")
        nodes = obj.nodes() if obj.is_finite else obj.window(3)
        for t in nodes:
            lines.append(f"  {_q(t)};")
        edges = obj.edges() if obj.is_finite else obj.window_edges(3)
        for u, v in edges:
            lines.append(f"  {_q(u)} -- {_q(v)};")
    elif isinstance(obj, (Leaf, Plus, Times)):
        lines.append("digraph expression {")
        counter = [0]

        def walk(e) -> str:
            name = f"n{counter[0]}"
            counter[0] += 1
            if isinstance(e, Leaf):
                sep = e.sep
                lines.append(f"  {name} [shape=box, label={_q(f'S={sorted(sep.separator, key=node_key)}')}];")
                return name
            lines.append(f"  {name} [label={_q(PLUS if isinstance(e, Plus) else TIMES)}];")
            for child in (e.left, e.right):
                lines.append(f"  {name} -> {walk(child)};")
            return name

        walk(obj)
    else:
        raise DomainError(f"cannot export {type(obj).__name__} to DOT")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reports


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"), default=_default)


def _default(x):
    if isinstance(x, (set, frozenset)):
        return sorted((encode_vertex(v) for v in x), key=lambda v: json.dumps(v))
    if isinstance(x, tuple):
        return encode_vertex(x)
    return str(x)


def digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p if isinstance(p, bytes) else canonical_json(p).encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()


@dataclass
class RunReport:
    command: str
    options: dict
    inputs_digest: str
    results: object = None
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"command": self.command, "options": self.options, "inputs_digest": self.inputs_digest,
                "results": self.results, "warnings": list(self.warnings)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False, default=_default) + "\n"
