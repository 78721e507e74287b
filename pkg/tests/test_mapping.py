import statistics

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qtranspile.backend import Backend, Model
from qtranspile.circuit import Circuit
from qtranspile.dag import from_dag, to_dag
from qtranspile.graph import WeightedGraph
from qtranspile.mapping import (
    UNREACHABLE, Layout, circuit_graph_of, LayoutError, RoutingConfig, RoutingError, RoutingState, distance_matrix, fidelity_matrix,
    heuristic_score, initial_layout, sabre_layout, sabre_route, select_swap,
)
from qtranspile.passes import unroll_to_two_qubit
from qtranspile.random_circuit import random_circuit
from qtranspile.simulator import equivalent_up_to_layout

from oracles import bfs_distances, max_product_paths


def random_graph(n, seed, p=0.4):
    rng = np.random.default_rng(seed)
    edges = [(a, b, float(rng.uniform(0.5, 1.0))) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return WeightedGraph.from_edges(edges, nodes=range(n))


def line_backend(n, fids=None):
    fids = fids or [0.99] * (n - 1)
    return Backend("line", n, [(i, i + 1, f) for i, f in enumerate(fids)])


def test_distance_trivial_cases():
    d = distance_matrix(WeightedGraph.from_edges([(0, 1, 1), (1, 2, 1)]))
    assert d[0][2] == 2 and d[2][0] == 2 and d[1][1] == 0
    k4 = WeightedGraph.from_edges([(a, b, 1) for a in range(4) for b in range(a + 1, 4)])
    d = distance_matrix(k4)
    assert (d == 1 - np.eye(4, dtype=int)).all()


def test_distance_disconnected():
    d = distance_matrix(WeightedGraph.from_edges([(0, 1, 1)], nodes=range(3)))
    assert d[0][2] == UNREACHABLE


def test_distance_matches_bfs():
    for seed in range(50):
        n = 2 + seed % 7
        g = random_graph(n, seed)
        oracle = bfs_distances(n, list(g.edges))
        oracle[oracle < 0] = UNREACHABLE
        assert (np.asarray(distance_matrix(g)) == oracle).all()


def test_fidelity_single_edge_and_triangle():
    fm = fidelity_matrix(WeightedGraph.from_edges([(0, 1, 0.97)]))
    assert fm[0, 1] == pytest.approx(0.97) and fm[1, 1] == 1.0
    tri = WeightedGraph.from_edges([(0, 1, 0.9), (1, 2, 0.99), (0, 2, 0.8)])
    fm = fidelity_matrix(tri)
    assert fm[0, 2] == pytest.approx(0.891, abs=1e-12)
    assert fm.path(0, 2) == [0, 1, 2]


def test_fidelity_matches_path_enumeration():
    for seed in range(50):
        n = 2 + seed % 7
        g = random_graph(n, 100 + seed)
        fm = fidelity_matrix(g)
        oracle = max_product_paths(n, [(a, b, w) for (a, b), w in g.edges.items()])
        vals = np.asarray(fm.values)
        assert np.max(np.abs(vals - oracle)) < 1e-12
        assert np.allclose(vals, vals.T)
        for i in range(n):
            for j in range(n):
                if oracle[i, j] > 0 and i != j:
                    path = fm.path(i, j)
                    prod = np.prod([g.weight(a, b) for a, b in zip(path, path[1:])])
                    assert prod == pytest.approx(vals[i, j], abs=1e-12)


def test_initial_layout_degree_fixture():
    # degrees: q1=3, q3=3, q0=2, q2=2 -> [q1, q3, q0, q2]
    gqc = WeightedGraph.from_edges([(1, 3, 1), (1, 0, 1), (1, 2, 1), (3, 0, 1), (3, 2, 1)])
    # degrees: v2=3, v0=2, v3=2, v1=1 -> [v2, v0, v3, v1]
    gv = WeightedGraph.from_edges([(2, 0, 1), (2, 3, 1), (2, 1, 1), (0, 3, 1)])
    lay = initial_layout(gqc, gv, "degree")
    assert lay.as_dict() == {1: 2, 3: 0, 0: 3, 2: 1}


def test_initial_layout_single_qubit_and_errors():
    gqc = WeightedGraph.from_edges([], nodes=[0])
    gv = WeightedGraph.from_edges([(0, 1, 1), (1, 2, 1), (1, 3, 1)])
    assert initial_layout(gqc, gv, "degree").as_dict() == {0: 1}
    with pytest.raises(LayoutError):
        initial_layout(gv, gqc, "degree")


def test_initial_layout_weight_breaks_degree_ties():
    # all circuit qubits on a 4-cycle have degree 2; weights decide
    gqc = WeightedGraph.from_edges([(0, 1, 1.0), (1, 2, 5.0), (2, 3, 1.0), (3, 0, 1.0)])
    gv = WeightedGraph.from_edges([(0, 1, 0.9), (1, 2, 0.9), (2, 3, 0.99), (3, 0, 0.99)])
    lay = initial_layout(gqc, gv, "weight")
    # circuit order by weight sum: q1 (6), q2 (6), q0 (2), q3 (2)
    # device order: v3 (1.98), v0 (1.89), v2 (1.89), v1 (1.8)
    assert lay.as_dict() == {1: 3, 2: 0, 0: 2, 3: 1}


def test_initial_layout_random_is_seeded():
    gqc = WeightedGraph.from_edges([(0, 1, 1)])
    gv = WeightedGraph.from_edges([(a, a + 1, 1) for a in range(7)])
    a = initial_layout(gqc, gv, "random", seed=4)
    assert a == initial_layout(gqc, gv, "random", seed=4)
    assert len(set(a.as_dict().values())) == 2


def _state(l2p, front, extended=(), decay=None, n=4):
    p2l = [0] * n
    for q, p in enumerate(l2p):
        p2l[p] = q
    return RoutingState(list(l2p), p2l, list(front), list(extended), decay or [1.0] * n)


def test_select_swap_single_sd_ignores_fidelity():
    # line 0-1-2-3, gate between physical 0 and 3; extra decay on 3 makes (0,1) the sole H_D minimum
    fids = [0.999, 0.9, 0.5]
    b = line_backend(4, fids)
    m = Model(b)
    st_ = _state([0, 1, 2, 3], [(0, 3)], decay=[1.0, 1.0, 1.0, 1.001])
    dist = m.distance_matrix.tolist()
    fid = m.fidelity_matrix.values.tolist()
    chosen, s_d, _ = select_swap([(0, 1), (2, 3)], st_, dist, fid, "H_M", np.random.default_rng(0))
    assert s_d == [(0, 1)] and chosen == (0, 1)
    # H_Fi alone would have preferred the other swap
    assert heuristic_score((2, 3), st_, fid, "H_Fi") > heuristic_score((0, 1), st_, fid, "H_Fi")


def test_select_swap_hand_case_picks_best_fidelity():
    # 4-cycle 0-1-2-3-0; logical 0 on p0, logical 2 on p2 must meet
    b = Backend("ring", 4, [(0, 1, 0.99), (1, 2, 0.9), (2, 3, 0.92), (0, 3, 0.95)])
    m = Model(b)
    dist = m.distance_matrix.tolist()
    fid = max_product_paths(4, b.coupling_list).tolist()
    st_ = _state([0, 1, 2, 3], [(0, 2)])
    cands = [(0, 1), (0, 3), (1, 2), (2, 3)]
    chosen, s_d, hd = select_swap(cands, st_, dist, fid, "H_M", np.random.default_rng(0))
    assert s_d == cands and hd == [1.0] * 4
    # after swap (1,2) the pair sits on the 0.99 edge: Fi = 0.99 beats 0.9, 0.95 and 0.92
    assert chosen == (1, 2)


def test_route_line_single_swap():
    b = line_backend(3)
    c = Circuit.empty(3).add("cx", 0, 2)
    res = sabre_route(to_dag(c), Model(b), "H_D", Layout.trivial(3), seed=0)
    assert res.swaps == 1
    out = from_dag(res.dag)
    assert equivalent_up_to_layout(c, out, res.initial_layout, res.final_layout)


def test_route_zero_swaps_when_isomorphic():
    b = line_backend(5)
    c = Circuit.empty(4).add("cx", 0, 1).add("cx", 1, 2).add("cx", 2, 3).add("cx", 1, 0)
    res = sabre_route(to_dag(c), Model(b), "H_M", Layout.trivial(4))
    assert res.swaps == 0


def test_route_disconnected_raises():
    b = Backend("split", 4, [(0, 1, 0.9), (2, 3, 0.9)])
    with pytest.warns(UserWarning, match="disconnected"):
        assert not b.warn_if_disconnected()
    with pytest.raises(RoutingError, match="disconnected"):
        sabre_route(to_dag(Circuit.empty(4).add("cx", 0, 2)), Model(b), "H_D", Layout.trivial(4))


def _check_route(c, backend, heuristic, seed):
    dag = unroll_to_two_qubit(to_dag(c))
    m = Model(backend)
    lay = sabre_layout(dag, m, heuristic, iterations=1, seed=seed)
    res = sabre_route(dag, m, heuristic, lay, seed=seed, record=True)
    out = from_dag(res.dag)
    for g in out.gates():
        if len(g.qubits) == 2:
            assert backend.is_coupled(*g.qubits)
    assert equivalent_up_to_layout(c, out, res.initial_layout, res.final_layout)
    return res


@pytest.mark.parametrize("heuristic", ["H_D", "H_Fi", "H_M"])
@given(seed=st.integers(0, 10_000), nq=st.integers(2, 5))
def test_route_property(heuristic, seed, nq):
    from qtranspile.chips import random_connected_backend

    b = random_connected_backend(6, seed=seed % 17, extra_edges=1)
    c = random_circuit(nq, 20, seed=seed)
    res = _check_route(c, b, heuristic, seed)
    for step in res.steps:
        if heuristic == "H_M":
            assert step.chosen in step.s_d


def test_route_deterministic():
    from qtranspile.chips import random_connected_backend

    b = random_connected_backend(8, seed=3)
    c = random_circuit(5, 30, seed=9)
    a = sabre_route(to_dag(c), Model(b), "H_M", Layout.trivial(5), seed=4)
    z = sabre_route(to_dag(c), Model(b), "H_M", Layout.trivial(5), seed=4)
    assert from_dag(a.dag).instructions == from_dag(z.dag).instructions and a.final_layout == z.final_layout


def test_flat_noise_fallback_switch():
    from qtranspile.chips import lattice_chip
    from qtranspile.resources import validate_chip_doc

    doc = lattice_chip(3, 3, seed=0)
    for e in doc["coupling_list"]:
        e[2] = 0.98
    b = validate_chip_doc(doc)
    c = random_circuit(8, 40, seed=2, gate_set=("cx", "h"))
    dag = to_dag(c)
    hd = sabre_route(dag, Model(b), "H_D", Layout.trivial(8), seed=1).swaps
    hm = sabre_route(dag, Model(b), "H_M", Layout.trivial(8), seed=1).swaps
    assert hd == hm
    off = RoutingConfig(flat_noise_fallback=False)
    res = sabre_route(dag, Model(b), "H_M", Layout.trivial(8), seed=1, config=off, record=True)
    assert all(s.chosen in s.s_d for s in res.steps)


def test_sabre_layout_iterations_zero_returns_initial():
    from qtranspile.chips import random_connected_backend

    b = random_connected_backend(8, seed=1)
    c = random_circuit(5, 20, seed=1)
    m = Model(b)
    dag = to_dag(c)
    init = initial_layout(circuit_graph_of(dag), b.coupling_graph(), "degree")
    assert sabre_layout(dag, m, "H_D", iterations=0) == init


def test_sabre_layout_finds_zero_swap_layout():
    b = line_backend(6)
    # a path 3-0-4-1-2 hidden behind a permutation of labels
    c = Circuit.empty(5).add("cx", 3, 0).add("cx", 0, 4).add("cx", 4, 1).add("cx", 1, 2).add("cx", 0, 4)
    m = Model(b)
    lay = sabre_layout(to_dag(c), m, "H_D", iterations=3, seed=0)
    assert sabre_route(to_dag(c), m, "H_D", lay).swaps == 0


def test_sabre_layout_iterations_help_on_median():
    from qtranspile.chips import random_connected_backend

    b = random_connected_backend(8, seed=5, extra_edges=2)
    m = Model(b)
    zero, three = [], []
    for seed in range(50):
        dag = to_dag(random_circuit(8, 30, seed=seed, gate_set=("cx", "cz", "rx")))
        for iters, bucket in ((0, zero), (3, three)):
            lay = sabre_layout(dag, m, "H_D", iterations=iters, seed=seed)
            bucket.append(sabre_route(dag, m, "H_D", lay, seed=seed).swaps)
    assert statistics.median(three) <= statistics.median(zero)
