import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kbraess.braess import BraessCircuitParams, fig3_circuit
from kbraess.circuit import Kind, build_circuit, capacitor, inductor, resistor, source
from kbraess.solver import (
    InconsistentCircuitError,
    evaluate_potential,
    kcl_residual,
    kvl_residual,
    node_basis,
    reduce_steady_state,
    solve,
    solve_dc,
    total_loss,
)
from kbraess.verify import random_circuit

from conftest import mna_solve

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_capacitor_branch_removed():
    c = build_circuit(3, [source(0, 1, 2.0), resistor(1, 0, 4.0), resistor(1, 2, 1.0), capacitor(2, 0)])
    rc = reduce_steady_state(c)
    assert 3 in rc.dropped
    s = solve_dc(rc)
    assert s.branch_currents[3] == 0.0
    assert s.branch_currents[2] == pytest.approx(0.0, abs=1e-15)
    assert s.total_loss == pytest.approx(1.0)


def test_inductor_contracted():
    c = build_circuit(3, [source(0, 1, 3.0), inductor(1, 2), resistor(2, 0, 1.5)])
    rc = reduce_steady_state(c)
    assert rc.base.n_nodes == 2
    assert rc.node_map[1] == rc.node_map[2]
    assert [el.kind for el in rc.base.elements] == [Kind.VOLTAGE_SOURCE, Kind.RESISTOR]
    s = solve_dc(rc)
    assert s.branch_currents[2] == pytest.approx(2.0)
    assert s.branch_currents[1] == pytest.approx(2.0)


def test_inductor_across_source_is_inconsistent():
    c = build_circuit(2, [source(0, 1, 5.0), inductor(0, 1), resistor(0, 1, 1.0)])
    with pytest.raises(InconsistentCircuitError, match="inconsistent short"):
        reduce_steady_state(c)


def test_shorted_resistor_dropped():
    c = build_circuit(3, [source(0, 1, 1.0), resistor(1, 2, 1.0), inductor(1, 2), resistor(2, 0, 1.0)])
    rc = reduce_steady_state(c)
    assert 1 in rc.dropped
    s = solve_dc(rc)
    assert s.branch_losses[1] == 0.0
    assert s.total_loss == pytest.approx(1.0)


def test_no_sources_gives_singletons():
    c = build_circuit(4, [resistor(0, 1, 1.0), resistor(1, 2, 1.0), resistor(2, 3, 1.0)])
    b = node_basis(reduce_steady_state(c))
    assert b.size == 4
    assert all(len(comp) == 1 for comp in b.components)


def test_fig3_components():
    # hand count: E1 joins 1-0 and E2 joins 3-1, node 2 stands alone
    b = node_basis(reduce_steady_state(fig3_circuit(BraessCircuitParams(1.0, 2.0, 1.0, 1.0, 1.0))))
    assert b.components == ((0, 1, 3), (2,))
    # representative is node 0: v1 = v0 - E1, v3 = v1 - E2
    assert b.representatives == (0, 2)
    assert list(b.offsets[[0, 1, 3]]) == pytest.approx([0.0, -1.0, -3.0])


def test_connected_source_graph_single_component():
    c = build_circuit(3, [source(0, 1, 1.0), source(1, 2, 1.0), resistor(0, 2, 1.0)])
    b = node_basis(reduce_steady_state(c))
    assert b.size == 1 and b.free == ()
    assert solve(c).total_loss == pytest.approx(4.0)


def test_source_loop_consistency():
    ok = build_circuit(2, [source(0, 1, 1.0), source(1, 0, -1.0), resistor(0, 1, 1.0)])
    node_basis(reduce_steady_state(ok))
    bad = build_circuit(2, [source(0, 1, 1.0), source(1, 0, 1.0), resistor(0, 1, 1.0)])
    with pytest.raises(InconsistentCircuitError, match="source loop"):
        node_basis(reduce_steady_state(bad))


def test_single_loop_ohms_law():
    s = solve(build_circuit(2, [source(0, 1, 1.0), resistor(1, 0, 2.0)]))
    assert s.branch_currents[1] == pytest.approx(0.5)
    assert s.total_loss == pytest.approx(0.5)
    assert total_loss(s) == pytest.approx(0.5)


def test_no_resistors_zero_loss():
    s = solve(build_circuit(3, [source(0, 1, 1.0), capacitor(1, 2)]))
    assert total_loss(s) == 0.0


def test_fig3_weak_cross_link():
    # closed-form currents with E1=0, E2=1, R1=R2=1, R3=1e-4 evaluated by hand: D = 1.0002
    s = solve(fig3_circuit(BraessCircuitParams(0.0, 1.0, 1.0, 1.0, 1e-4)))
    i = s.branch_currents
    assert i[1] == pytest.approx(1e-4 / 1.0002, rel=1e-12)
    assert i[2] == pytest.approx(1.0001 / 1.0002, rel=1e-12)
    assert i[4] == pytest.approx(1.0 / 1.0002, rel=1e-12)


def test_fig3_balanced_cross_link_carries_nothing():
    for r3 in (1e-6, 1.0, 1e4):
        s = solve(fig3_circuit(BraessCircuitParams(1.5, 1.5, 2.0, 2.0, r3)))
        assert abs(s.branch_currents[4]) < 1e-12


def test_fig3_losses_with_and_without_link():
    before = solve(fig3_circuit(BraessCircuitParams(0.0, 1.0, 1.0, 1.0)))
    assert total_loss(before) == pytest.approx(0.5)  # E2^2 / (R1 + R2)
    after = solve(fig3_circuit(BraessCircuitParams(0.0, 1.0, 1.0, 1.0, 1e-6)))
    assert total_loss(after) == pytest.approx(1.0, abs=1e-5)  # ~ E2^2 / R2


def test_potential_matches_loss_at_solution():
    s = solve(fig3_circuit(BraessCircuitParams(0.3, 1.2, 2.0, 0.7, 0.9)))
    p = evaluate_potential(s.reduced, s.basis_voltages, s.basis)
    assert p == pytest.approx(s.total_loss, rel=1e-12)


def test_potential_zero_state():
    c = build_circuit(3, [resistor(0, 1, 1.0), resistor(1, 2, 1.0), resistor(0, 2, 3.0)])
    rc = reduce_steady_state(c)
    b = node_basis(rc)
    assert evaluate_potential(rc, np.zeros(len(b.free)), b) == 0.0


def test_disconnected_pieces_each_grounded():
    c = build_circuit(4, [source(0, 1, 1.0), resistor(0, 1, 1.0), source(2, 3, 2.0), resistor(3, 2, 4.0)])
    s = solve(c)
    assert s.node_voltages[0] == 0.0 and s.node_voltages[2] == 0.0
    assert s.total_loss == pytest.approx(2.0)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_matches_mna_oracle(seed):
    c = random_circuit(np.random.default_rng(seed))
    s = solve(c)
    _, i_ref = mna_solve(c)
    res = [k for k, el in enumerate(c.elements) if el.kind is Kind.RESISTOR]
    scale = max(1.0, np.abs(i_ref[res]).max())
    assert np.allclose(s.branch_currents[res], i_ref[res], rtol=0, atol=1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_kirchhoff_laws(seed):
    c = random_circuit(np.random.default_rng(seed))
    s = solve(c)
    assert kcl_residual(s) <= 1e-9
    assert kvl_residual(s) <= 1e-9
    # explicit cycle sums over the DC graph
    g = nx.MultiGraph()
    for k, el in enumerate(c.elements):
        if el.kind is Kind.CAPACITOR:
            continue
        if el.kind is Kind.RESISTOR:
            d = s.branch_currents[k] * el.value  # potential drop a -> b
        elif el.kind is Kind.VOLTAGE_SOURCE:
            d = -el.value
        else:
            d = 0.0
        g.add_edge(el.a, el.b, key=k, drop=d)
    scale = max(1.0, np.abs(s.node_voltages).max())
    for cycle in nx.cycle_basis(nx.Graph(g)):
        total = 0.0
        for u, v in zip(cycle, cycle[1:] + cycle[:1]):
            k, data = next(iter(g.get_edge_data(u, v).items()))
            el = c.elements[k]
            total += data["drop"] if el.a == u else -data["drop"]
        assert abs(total) <= 1e-9 * scale


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_losses_decompose(seed):
    s = solve(random_circuit(np.random.default_rng(seed)))
    assert s.intra_component_loss >= 0 and s.inter_component_loss >= -1e-12
    assert s.total_loss == pytest.approx(s.intra_component_loss + s.inter_component_loss, abs=1e-12)
    assert s.total_loss == pytest.approx(float(np.sum(s.branch_losses)), rel=1e-12)


def _fd_gradient(rc, basis, e, h=1e-6):
    grad = np.zeros_like(e)
    for k in range(len(e)):
        step = h * max(1.0, abs(e[k]))
        up, dn = e.copy(), e.copy()
        up[k] += step
        dn[k] -= step
        grad[k] = (evaluate_potential(rc, up, basis) - evaluate_potential(rc, dn, basis)) / (2 * step)
    return grad


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_gradient_vanishes_at_solution(seed):
    s = solve(random_circuit(np.random.default_rng(seed)))
    if not len(s.basis_voltages):
        return
    grad = _fd_gradient(s.reduced, s.basis, np.array(s.basis_voltages))
    scale = 2.0 * max(1.0, np.abs(s.branch_currents).max())
    assert np.linalg.norm(grad) / scale <= 1e-6


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(min_value=-6, max_value=0))
def test_minimum_principle(seed, log_norm):
    rng = np.random.default_rng(seed)
    s = solve(random_circuit(rng))
    if not len(s.basis_voltages):
        return
    d = rng.normal(size=len(s.basis_voltages))
    d *= 10.0 ** log_norm / np.linalg.norm(d)
    p0 = evaluate_potential(s.reduced, s.basis_voltages, s.basis)
    p1 = evaluate_potential(s.reduced, s.basis_voltages + d, s.basis)
    assert p1 >= p0 - 1e-12 * max(1.0, p0)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_basis_independence(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng)
    rc = reduce_steady_state(c)
    default = node_basis(rc)
    reps = [int(rng.choice(comp)) for comp in default.components]
    other = node_basis(rc, representatives=reps)
    s1, s2 = solve_dc(rc, default), solve_dc(rc, other)
    scale = max(1.0, np.abs(s1.node_voltages).max())
    assert np.allclose(s1.node_voltages, s2.node_voltages, rtol=0, atol=1e-9 * scale)
    assert s2.total_loss == pytest.approx(s1.total_loss, rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_superposition(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, reactive=False)
    src = c.indices(Kind.VOLTAGE_SOURCE)

    def with_values(vals):
        els = list(c.elements)
        for k, v in zip(src, vals):
            els[k] = source(els[k].a, els[k].b, v)
        return build_circuit(c.n_nodes, els)

    # values drawn as potential differences keep any source loop consistent
    def draw():
        phi = rng.uniform(-5, 5, size=c.n_nodes)
        return np.array([phi[c.elements[k].b] - phi[c.elements[k].a] for k in src])

    e1, e2 = draw(), draw()
    i_f = solve(with_values(e1)).branch_currents
    i_g = solve(with_values(e2)).branch_currents
    i_fg = solve(with_values(e1 + e2)).branch_currents
    scale = max(1.0, np.abs(i_fg).max())
    assert np.allclose(i_f + i_g, i_fg, rtol=0, atol=1e-9 * scale)
