"""Command-line entry point: ``accessibility <subcommand> [options]``.

Exit codes: 0 success, 1 validation or domain error (including usage),
2 a budget or resolution caveat when ``--strict`` is given.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

import networkx as nx

from . import io
from .catalog import CATALOG, REPRODUCES, catalog_spec
from .errors import AccessibilityError, BudgetError, DomainError, NotGeneratedError, OracleError, ResolutionError
from .graph_core import FAMILIES, FiniteGraph, GraphMorphism, GroupAction, ball
from .separation import (
    all_separations,
    decompose_into_tight,
    end_proxies,
    enumerate_tight,
    evaluate,
    is_tight,
    leaves,
    random_separation,
    semiring_violations,
)
from .splitting import DRIVERS, Factor, factor_of_family, run_process, size_trace_report
from .tree_amalg import classify_type, construct_amalgam, corresponding_td, identification, is_trivial
from .tree_decomp import (
    Tree,
    contract_compressible,
    line_tree,
    node_key,
    size_sequence,
    validate_td,
)


class UsageError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _vertex(text: str):
    try:
        return io.decode_vertex(json.loads(text))
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="accessibility", description="Separations, tree amalgamations and processes of splittings.")
    common = _Parser(add_help=False)
    common.add_argument("--graph", default="line", help="family name, catalog spec name or graph document")
    common.add_argument("--radius", type=int, default=4)
    common.add_argument("--budget", type=int, default=6)
    common.add_argument("--order", type=int, default=2)
    common.add_argument("--out", help="write the report (or DOT with --dot) to this file")
    common.add_argument("--json", action="store_true", help="print the full JSON report")
    common.add_argument("--strict", action="store_true", help="exit 2 on budget or resolution caveats")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("tight", parents=[common], help="enumerate tight separations through a vertex")
    s.add_argument("--vertex", type=_vertex, default=None)
    s = sub.add_parser("decompose", parents=[common], help="decompose separations into tight ones")
    s.add_argument("--separation", help="separation document (JSON text or file); default: all of a finite graph")
    s = sub.add_parser("semiring-check", parents=[common], help="run the semiring axiom suite")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--graphs", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("amalgamate", parents=[common], help="construct an amalgam and export a ball")
    s.add_argument("--spec", required=True, help="catalog name or amalgam document")
    s.add_argument("--dot", action="store_true")
    s = sub.add_parser("td-validate", parents=[common], help="validate a tree-decomposition")
    s.add_argument("--spec", help="validate the decomposition of this amalgam")
    s.add_argument("--td", help="decomposition document over --graph")
    for name in ("size-seq", "compress"):
        s = sub.add_parser(name, parents=[common], help="size sequence" if name == "size-seq" else
                           "contract compressible edges")
        s.add_argument("--tree", default="line", help="'line' (translations) or a tree document with generators")
    s = sub.add_parser("process", parents=[common], help="run a process of splittings")
    s.add_argument("--script", help="process document")
    s.add_argument("--driver", default="minimal", choices=sorted(DRIVERS))
    sub.add_parser("ends", parents=[common], help="end proxies at the given radius")
    sub.add_parser("catalog", parents=[common], help="list built-in families and specs")
    return p


# ---------------------------------------------------------------------------
# subcommands


def _graph(args):
    return io.load_graph(args.graph)


def cmd_tight(args, rep):
    g, _ = _graph(args)
    v = g.root if args.vertex is None else io.vertex_in(g, io.encode_vertex(args.vertex))
    seps = enumerate_tight(g, v, args.order, args.radius)
    return {"vertex": io.vertex_out(g, v), "count": len(seps), "separations": [io.separation_to_doc(x) for x in seps]}


def cmd_decompose(args, rep):
    g, _ = _graph(args)
    if args.separation:
        text = Path(args.separation).read_text() if Path(args.separation).exists() else args.separation
        todo = [io.separation_from_doc(g, json.loads(text))]
    else:
        todo = list(all_separations(g, args.order))
    ok, missing, out = 0, 0, []
    for x in todo:
        try:
            e = decompose_into_tight(x, args.radius)
        except NotGeneratedError as exc:
            missing += 1
            rep.warnings.append(f"{io.separation_to_doc(x)}: {exc}")
            continue
        good = evaluate(e) == x and all(is_tight(y) and y.order <= x.order for y in leaves(e) if not y.is_neutral())
        ok += good
        if len(todo) == 1:
            out.append(io.expression_to_doc(e))
    return {"checked": len(todo), "round_trip": ok, "not_generated": missing, "expressions": out}


def cmd_semiring(args, rep):
    rng = random.Random(args.seed)
    failures, triples = [], 0
    per = max(1, args.samples // max(1, args.graphs))
    for gi in range(args.graphs):
        n = rng.randint(3, 12)
        while True:
            h = nx.gnp_random_graph(n, rng.uniform(0.2, 0.6), seed=rng.randrange(1 << 30))
            if nx.is_connected(h):
                break
        g = FiniteGraph.from_networkx(h, name=f"random-{gi}")
        for _ in range(per):
            xs = [random_separation(g, rng, args.order) for _ in range(3)]
            triples += 1
            for law in semiring_violations(*xs):
                failures.append({"graph": gi, "law": law})
    return {"graphs": args.graphs, "triples": triples, "failures": failures}


def cmd_amalgamate(args, rep):
    spec = io.resolve_spec(args.spec)
    a = construct_amalgam(spec)
    b = ball(a, [a.root], args.radius)
    sizes = sorted({identification(a, v).size for v in b.vertices})
    result = {"spec": spec.name, "ball_vertices": len(b.vertices), "ball_edges": len(b.edges),
              "identification_sizes": sizes, "trivial": is_trivial(spec, a),
              "type": classify_type(spec, args.budget).kind}
    if args.dot:
        result["dot"] = io.export_dot(b)
    return result


def cmd_td_validate(args, rep):
    if args.spec:
        td = corresponding_td(construct_amalgam(io.resolve_spec(args.spec)))
    elif args.td:
        g, _ = _graph(args)
        td = io.td_from_doc(g, json.loads(Path(args.td).read_text()))
    else:
        raise UsageError("td-validate needs --spec or --td")
    report = validate_td(td, args.radius)
    return {"valid": report.valid, "violations": [
        {"axiom": v.axiom, "message": v.message, "witness": repr(v.witness)} for v in report.violations]}


def _tree_and_action(args):
    if args.tree == "line":
        act = GroupAction([GraphMorphism("t", lambda x: x + 1, "T"), GraphMorphism("T", lambda x: x - 1, "t")],
                          args.budget)
        return line_tree(), act
    doc = json.loads(Path(args.tree).read_text())
    g, act = io.parse_graph_document(doc)
    if not g.is_finite:
        raise DomainError("tree documents must describe finite trees")
    if not nx.is_tree(g.to_networkx()):
        raise DomainError(f"{args.tree} is not a tree")
    return Tree.finite(g.vertices(), g.edges(), name=g.name), act


def cmd_size_seq(args, rep):
    tree, act = _tree_and_action(args)
    seq = size_sequence(tree, act, args.budget)
    return {"size": [seq.head, list(seq.tail)], "text": str(seq)}


def cmd_compress(args, rep):
    tree, act = _tree_and_action(args)
    cr = contract_compressible(tree, act, args.budget)
    seq = size_sequence(cr.tree, cr.action, args.budget)
    out = {"rounds": len(cr.log), "size": [seq.head, list(seq.tail)], "log": [repr(x) for x in cr.log]}
    if cr.tree.is_finite:
        out["nodes"] = [io.encode_vertex(t) for t in cr.tree.nodes()]
        out["edges"] = [[io.encode_vertex(u), io.encode_vertex(v)] for u, v in cr.tree.edges()]
    return out


def cmd_process(args, rep):
    if args.script:
        script = io.parse_process_document(Path(args.script).read_text(), Path(args.script).parent)
        factor = Factor(script.graph, script.action, getattr(script.graph, "name", "G"))
        outcome = run_process(factor, io.script_driver(script.steps), script.budget, script.resolution)
    else:
        outcome = run_process(factor_of_family(args.graph), DRIVERS[args.driver], args.budget, args.radius)
    st = outcome.state
    if outcome.kind == "BudgetExceeded":
        rep.warnings.append(f"process budget of {outcome.steps} steps exhausted before a terminal factorisation")
    return {
        "outcome": outcome.kind, "steps": outcome.steps, "reason": outcome.reason,
        "factors": st.factorisation.names(), "structure": st.factorisation.structure,
        "sizes": [[s.head, list(s.tail)] for s in st.sizes], "checks": st.checks,
        "rejections": [[list(k), r] for k, r in st.rejections],
        "trace": [{"step": c.step, "order": c.order.name, "strict": c.strict_growth}
                  for c in size_trace_report(st)],
    }


def cmd_ends(args, rep):
    g, _ = _graph(args)
    proxies = end_proxies(g, args.radius, rep.warnings)
    return {"radius": args.radius, "count": len(proxies),
            "seeds": [io.vertex_out(g, p.seed) for p in sorted(proxies, key=lambda p: node_key(p.seed))]}


def cmd_catalog(args, rep):
    return {"families": list(FAMILIES),
            "specs": [{"name": n, "reproduces": REPRODUCES.get(n), "p1": catalog_spec(n).p1,
                       "p2": catalog_spec(n).p2} for n in CATALOG]}


COMMANDS = {
    "tight": cmd_tight,
    "decompose": cmd_decompose,
    "semiring-check": cmd_semiring,
    "amalgamate": cmd_amalgamate,
    "td-validate": cmd_td_validate,
    "size-seq": cmd_size_seq,
    "compress": cmd_compress,
    "process": cmd_process,
    "ends": cmd_ends,
    "catalog": cmd_catalog,
}


def _inputs_digest(args) -> str:
    files = []
    for key in ("graph", "spec", "td", "tree", "script", "separation"):
        val = getattr(args, key, None)
        if val and Path(val).is_file():
            files.append(Path(val).read_bytes())
    return io.digest(sorted((k, v) for k, v in vars(args).items() if k not in ("out", "json")), *files)


def dispatch(argv: list[str]) -> tuple[int, io.RunReport | None, str]:
    """Run one subcommand; returns the exit code, the report and the text to print."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
    except UsageError as exc:
        return 1, None, f"error: {exc}"
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "json", "command")}
    rep = io.RunReport(args.command, opts, _inputs_digest(args))
    code = 0
    try:
        rep.results = COMMANDS[args.command](args, rep)
    except (BudgetError, ResolutionError) as exc:
        rep.warnings.append(f"{type(exc).__name__}: {exc}")
        code = 2 if args.strict else 0
    except (AccessibilityError, OracleError, json.JSONDecodeError, OSError) as exc:
        rep.warnings.append(f"{type(exc).__name__}: {exc}")
        return 1, rep, f"error: {exc}"
    if rep.warnings and args.strict:
        code = 2
    text = rep.to_json()
    if args.out:
        payload = rep.results.get("dot") if getattr(args, "dot", False) and rep.results else None
        Path(args.out).write_text(payload or text, encoding="utf-8")
    if not args.json and rep.results is not None:
        text = _summary(args.command, rep)
    return code, rep, text


def _summary(command: str, rep: io.RunReport) -> str:
    r = rep.results
    if command == "amalgamate" and "dot" in r:
        return r["dot"]
    parts = []
    for k, v in r.items():
        if isinstance(v, (list, dict)) and k not in ("size", "factors", "sizes", "identification_sizes"):
            parts.append(f"{k}: {len(v)} entries")
        else:
            parts.append(f"{k}={json.dumps(v, ensure_ascii=False)}")
    lines = [f"{command}: " + ", ".join(parts)]
    lines.extend(f"warning: {w}" for w in rep.warnings[:5])
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    code, _, text = dispatch(sys.argv[1:] if argv is None else argv)
    stream = sys.stderr if code == 1 else sys.stdout
    stream.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
