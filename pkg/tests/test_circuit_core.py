import numpy as np
import pytest
from hypothesis import given, strategies as st

from qtranspile.chips import ladder_demo_circuit
from qtranspile.circuit import GATES, Circuit, gate_matrix
from qtranspile.dag import from_dag, to_dag
from qtranspile.graph import WeightedGraph, circuit_weighted_graph
from qtranspile.params import ParamExpr
from qtranspile.random_circuit import random_circuit
from qtranspile.simulator import SimulationError, equivalent_up_to_layout, simulate_statevector

from oracles import dense_state, reference_matrix, same_up_to_phase


def _wire_paths_ok(c, dag):
    for q in range(c.num_qubits):
        expected = [i for i in c.instructions if q in i.qubits]
        got = [n.instr for n in dag.wire_ops(("q", q))]
        if got != expected:
            return False
    return True


def test_dag_figure_circuit_structure():
    c = ladder_demo_circuit()
    dag = to_dag(c)
    assert len(dag.op_nodes()) == len(c.instructions)
    assert _wire_paths_ok(c, dag)
    # edges: one per consecutive pair on each wire, sentinels included
    per_wire = sum(sum(1 for i in c.instructions if q in i.qubits) + 1 for q in range(6))
    assert len(list(dag.edges())) == per_wire
    # the first layer is the six Hadamards
    assert sorted(dag.nodes[n].instr.qubits[0] for n in dag.front_layer()) == list(range(6))


def test_dag_empty_has_sentinels_only():
    dag = to_dag(Circuit.empty(3))
    assert dag.op_nodes() == []
    assert len(dag.nodes) == 6
    assert from_dag(dag).instructions == []


def test_dag_disjoint_gates_unordered():
    c = Circuit.empty(4).add("cx", 0, 1).add("cz", 2, 3)
    dag = to_dag(c)
    a, b = [n.id for n in dag.op_nodes()]
    assert b not in dag.op_successors(a) and a not in dag.op_successors(b)
    assert sorted(dag.front_layer()) == sorted([a, b])


def test_dag_acyclic_and_round_trip_corpus():
    for seed in range(100):
        c = random_circuit(4, 25, seed=seed, measure=seed % 2 == 0)
        dag = to_dag(c)
        order = [n.id for n in dag.topological_nodes()]
        pos = {nid: k for k, nid in enumerate(order)}
        assert all(pos[a] < pos[b] for a, b, _ in dag.edges())
        assert _wire_paths_ok(c, dag)
        back = from_dag(dag)
        assert same_up_to_phase(dense_state(back), dense_state(c))


def test_weighted_graph_of_figure_circuit():
    g = circuit_weighted_graph(ladder_demo_circuit())
    expected = {(0, 1): 2, (1, 4): 2, (1, 2): 1, (0, 3): 1, (2, 5): 1, (3, 4): 1, (4, 5): 1}
    assert dict(g.edges) == expected
    assert sorted(g.nodes) == list(range(6))


def test_weighted_graph_ccx_triangle_and_counting():
    g = circuit_weighted_graph(Circuit.empty(3).add("ccx", 0, 1, 2))
    assert dict(g.edges) == {(0, 1): 1, (0, 2): 1, (1, 2): 1}
    g = circuit_weighted_graph(Circuit.empty(2).add("cx", 0, 1).add("cx", 0, 1).add("cx", 1, 0))
    assert dict(g.edges) == {(0, 1): 3}


def test_weighted_graph_rejects_self_loops_and_normalizes():
    g = WeightedGraph()
    with pytest.raises(ValueError):
        g.add_edge(1, 1)
    g.add_edge(0, 1, 4.0)
    g.add_edge(1, 2, 2.0)
    assert dict(g.normalized().edges) == {(0, 1): 1.0, (1, 2): 0.5}


def test_simulate_trivial_states():
    h = simulate_statevector(Circuit.empty(1).add("h", 0))
    assert np.allclose(h, [1 / np.sqrt(2), 1 / np.sqrt(2)])
    bell = simulate_statevector(Circuit.empty(2).add("h", 0).add("cx", 0, 1))
    assert np.allclose(bell, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])
    # qubit 0 is the least significant bit
    x1 = simulate_statevector(Circuit.empty(2).add("x", 1))
    assert np.allclose(x1, [0, 0, 1, 0])


def test_simulate_matches_dense_oracle():
    for seed in range(20):
        c = random_circuit(5, 30, seed=seed, gate_set=tuple(g for g in GATES if GATES[g].num_qubits <= 3))
        assert np.max(np.abs(simulate_statevector(c) - dense_state(c))) < 1e-10


def test_gate_table_matches_reference():
    rng = np.random.default_rng(3)
    for name, gdef in GATES.items():
        params = rng.uniform(-np.pi, np.pi, gdef.num_params)
        assert np.allclose(gate_matrix(name, params), reference_matrix(name, params)), name


def test_simulate_errors():
    with pytest.raises(SimulationError):
        simulate_statevector(Circuit.empty(13).add("h", 0))
    with pytest.raises(SimulationError, match="unbound parameter"):
        simulate_statevector(Circuit.empty(1).add("rz", 0, params=[ParamExpr.symbol("a")]))


@pytest.mark.parametrize("name", sorted(GATES))
def test_norm_preserved_per_gate(name):
    gdef = GATES[name]
    c = random_circuit(3, 5, seed=1)
    c.add(name, *range(gdef.num_qubits), params=[0.37] * gdef.num_params)
    assert abs(np.linalg.norm(simulate_statevector(c)) - 1) < 1e-10


def test_equivalence_identity_and_routed_cnot():
    c = random_circuit(3, 10, seed=5)
    assert equivalent_up_to_layout(c, c)
    orig = Circuit.empty(3).add("h", 0).add("cx", 0, 2)
    # line 0-1-2: swap the contents of 0 and 1, then act on the adjacent pair
    routed = Circuit.empty(3).add("h", 0).add("swap", 0, 1).add("cx", 1, 2)
    assert equivalent_up_to_layout(orig, routed, {0: 0, 1: 1, 2: 2}, {0: 1, 1: 0, 2: 2})
    assert not equivalent_up_to_layout(orig, routed, {0: 0, 1: 1, 2: 2}, {0: 0, 1: 1, 2: 2})


def test_equivalence_mutation_detected():
    for seed in range(10):
        c = random_circuit(3, 12, seed=seed, gate_set=("cx", "h", "t", "rx"))
        mutated = c.copy()
        mutated.instructions = mutated.instructions[:-1]
        if same_up_to_phase(dense_state(c), dense_state(mutated)):
            continue  # the removed gate happened to act trivially on |0..0>
        assert not equivalent_up_to_layout(c, mutated)


@given(st.integers(1, 4), st.integers(0, 20), st.integers(0, 999), st.permutations(range(5)))
def test_equivalence_under_relabeling(nq, ng, seed, perm):
    c = random_circuit(nq, ng, seed=seed)
    layout = {q: perm[q] for q in range(nq)}
    placed = Circuit.empty(5)
    placed.instructions = [i.remap(perm) for i in c.instructions]
    assert equivalent_up_to_layout(c, placed, layout, layout)
