import pytest

from accessibility.catalog import catalog_spec, cycle, path
from accessibility.errors import BudgetError, DomainError
from accessibility.graph_core import LineGraph, family, line_action, trivial_action
from accessibility.splitting import (
    DRIVERS,
    Factor,
    Factorisation,
    StepRejected,
    ball_isomorphism,
    connected_superset,
    enlarge_parts,
    factor_of_family,
    initial_state,
    is_terminal,
    nice_finite_complement,
    run_process,
    size_trace_report,
    split_step,
)
from accessibility.tree_amalg import AmalgamSpec, construct_amalgam
from accessibility.tree_decomp import (
    Order,
    TreeDecomposition,
    is_invariant,
    line_tree,
    path_tree,
    validate_td,
)


def test_line_split_by_double_ray_gives_two_edges():
    st = initial_state(factor_of_family("line"))
    out = split_step(st, 0, catalog_spec("double-ray"))
    assert out.steps == 1
    assert [f.graph.n for f in out.factorisation.factors] == [2, 2]
    assert all(len(f.graph.edges()) == 1 for f in out.factorisation.factors)
    assert out.factorisation.structure[0][:2] == ("line", "double-ray")
    assert st.steps == 0  # input state untouched


def test_trivial_spec_rejected():
    st = initial_state(Factor(cycle(4), trivial_action(), "C4"))
    with pytest.raises(StepRejected) as exc:
        split_step(st, 0, catalog_spec("trivial"))
    assert "non-trivial" in exc.value.reason


def test_spec_without_ends_rejected():
    # P3 glued to P3 at one end over a single tree edge: P5, which has no ends
    p3 = path(3)
    spec = AmalgamSpec(p3, p3, {1: [2]}, {2: [0]}, {(1, 2): {2: 0}}, name="p3-end-p3")
    st = initial_state(Factor(path(5), trivial_action(), "P5"))
    with pytest.raises(StepRejected) as exc:
        split_step(st, 0, spec)
    assert "distinguish ends" in exc.value.reason


def test_mismatched_spec_rejected_by_ball_check():
    st = initial_state(factor_of_family("line"))
    with pytest.raises(StepRejected) as exc:
        split_step(st, 0, catalog_spec("c4-c4"))
    assert "reproduce" in exc.value.reason


def test_bad_factor_index():
    with pytest.raises(DomainError):
        split_step(initial_state(factor_of_family("line")), 3, catalog_spec("double-ray"))


def test_is_terminal_examples():
    p2 = Factor(path(2), trivial_action(), "P2")
    assert is_terminal(Factorisation([p2, p2]))
    v = is_terminal(Factorisation([factor_of_family("line")]))
    assert not v
    assert v.witness[0] == (2, 2)
    g, act = family("grid2d")
    v = is_terminal(Factorisation([Factor(g, act, "grid2d")]))
    assert v and v.witness[0] == (1, 1)


def _line_phi(spec, a):
    line = LineGraph()
    iso = ball_isomorphism(line, 0, a, a.root, 12)
    inv = {w: v for v, w in iso.items()}
    u, v = (), (spec.i1[0],)
    (shared,) = a.copy(u) & a.copy(v)
    c = inv[shared]
    return u, v, (lambda x: iso[2 * c - inv[x]]), line


def test_complement_single_vertex():
    spec = catalog_spec("double-ray")
    a = construct_amalgam(spec)
    u, v, phi, line = _line_phi(spec, a)
    comp = nice_finite_complement(a, u, v, phi, spec.adhesion1[v[0]])
    # S' = {a} is fixed by the reflection, so pi(S') and its image coincide
    assert comp.g2.n == 1 and comp.g2.edges() == []
    b = construct_amalgam(comp.spec)
    assert ball_isomorphism(line, 0, b, b.root, 10) is not None


def test_complement_whole_factor():
    spec = catalog_spec("double-ray")
    a = construct_amalgam(spec)
    u, v, phi, line = _line_phi(spec, a)
    comp = nice_finite_complement(a, u, v, phi, spec.g1.vertices())
    assert comp.g2.n == 3 and len(comp.g2.edges()) == 2
    b = construct_amalgam(comp.spec)
    assert ball_isomorphism(line, 0, b, b.root, 10) is not None


def test_complement_rejects_non_inverting_phi():
    spec = catalog_spec("double-ray")
    a = construct_amalgam(spec)
    u, v, _, _ = _line_phi(spec, a)
    with pytest.raises(DomainError):
        nice_finite_complement(a, u, v, lambda x: x, spec.adhesion1[v[0]])


def _line_td():
    return TreeDecomposition(LineGraph(), line_tree(), part=lambda t: frozenset({t, t + 1}),
                             locate=lambda x: frozenset({x - 1, x}))


def test_enlarge_parts_on_line():
    out = enlarge_parts(_line_td(), {0, 3}, line_action(), budget=12)
    assert any({0, 3} <= out.part(t) for t in range(-3, 4))
    assert sorted(out.part(0)) == list(range(-3, 5))
    assert validate_td(out).valid
    assert is_invariant(out, line_action(), 3)


def test_enlarge_parts_unchanged_when_contained():
    td = _line_td()
    assert enlarge_parts(td, {0, 1}, line_action()) is td


def test_enlarge_parts_trivial_action_finite():
    g = path(5)
    tree = path_tree(4)
    td = TreeDecomposition(g, tree, parts={t: frozenset({t, t + 1}) for t in range(4)})
    out = enlarge_parts(td, {0, 2}, trivial_action())
    # S' = {0,1,2} meets parts 0..2, which receive S'; part 3 is untouched
    for t in range(3):
        assert {0, 1, 2} <= out.part(t)
    assert out.part(3) == td.part(3)
    assert validate_td(out).valid


def test_enlarge_parts_budget_error():
    with pytest.raises(BudgetError):
        enlarge_parts(_line_td(), {0, 3}, line_action(), budget=1)


def test_connected_superset_on_line():
    assert connected_superset(LineGraph(), {0, 3}) == frozenset(range(4))


def test_run_process_examples():
    out = run_process(factor_of_family("line"), DRIVERS["minimal"], budget=5)
    assert out.kind == "Terminated" and out.steps == 1
    g, act = family("grid2d")
    for driver in DRIVERS.values():
        out = run_process(Factor(g, act, "grid2d", "grid2d"), driver, budget=5)
        assert out.kind == "Terminated" and out.steps == 0
    out = run_process(factor_of_family("line"), DRIVERS["minimal"], budget=0)
    assert out.kind == "BudgetExceeded" and not out


def test_run_process_stalls_on_repeated_rejection():
    def stubborn(st):
        return 0, catalog_spec("c4-c4")

    out = run_process(factor_of_family("line"), stubborn, budget=5)
    assert out.kind == "Stalled" and out.steps == 0
    assert len(out.state.rejections) == 1


def test_size_trace_reports():
    out = run_process(factor_of_family("line"), DRIVERS["minimal"], budget=5)
    rep = size_trace_report(out.state)
    assert len(rep) == 1 and rep[0].strict_growth and not rep[0].anomaly
    assert size_trace_report(initial_state(factor_of_family("line"))) == []
    st = out.state
    replayed = type(st)(st.factorisation, st.steps + 1, st.sizes + [st.sizes[-1]])
    last = size_trace_report(replayed)[-1]
    assert last.order == Order.EQUAL and last.anomaly


@pytest.mark.parametrize("fam", ["line", "ladder", "tree(3)"])
def test_drivers_agree_on_termination(fam):
    kinds = {name: run_process(factor_of_family(fam), d, budget=10).kind for name, d in DRIVERS.items()}
    assert len(set(kinds.values())) == 1, kinds
