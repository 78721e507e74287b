"""Acceptance gate: the ten primary criteria at their stated tolerances.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import json
import math
import statistics
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.stats import unitary_group

import conftest
from oracles import big_endian_unitary, bfs_distances, brute_isomorphic, is_connected, max_product_paths, \
    phase_free_distance, reference_matrix
from qtranspile.api import _circuit_graph, call_compiler_api
from qtranspile.backend import Backend, Model
from qtranspile.bench import Strategy
from qtranspile.chips import BAIHUA_BLOCK, baihua_like_chip, ladder_demo_circuit, lattice_chip, \
    random_connected_backend
from qtranspile.circuit import Circuit, Instruction
from qtranspile.cli import main
from qtranspile.dag import from_dag, to_dag
from qtranspile.graph import WeightedGraph, circuit_weighted_graph
from qtranspile.mapping import UNREACHABLE, Layout, distance_matrix, fidelity_matrix, initial_layout, sabre_layout, \
    sabre_route
from qtranspile.mapping.routing import RoutingConfig
from qtranspile.metrics import circuit_cost, hellinger_fidelity, verify_program
from qtranspile.params import ParamExpr
from qtranspile.passes import cancel_inverses, fuse_1q, unroll_to_basis, unroll_to_two_qubit
from qtranspile.qasm import emit_qasm
from qtranspile.random_circuit import random_circuit
from qtranspile.resources import ResourceDB, find_substructures, validate_chip_doc
from qtranspile.selector import KernelConfig, SelectionRequest, edge_similarity, graph_isomorphic, \
    select_structure_first, wl_kernel
from qtranspile.simulator import equivalent_up_to_layout
from qtranspile.synthesis import cnot_count, decompose_one_qubit_zyz, decompose_two_qubit_kak
from qtranspile.transpiler import transpile

CX_BASIS = ["cx", "rx", "ry", "rz"]


@contextmanager
def criterion(num, title):
    """Record PASS/FAIL for one criterion; failures still fail the test."""
    detail = {}
    t0 = time.perf_counter()
    try:
        yield detail
    except BaseException as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        conftest.ACCEPTANCE_LINES[num] = f"FAIL criterion {num:2d} ({title}): {msg[:120]}"
        raise
    extra = " ".join(f"{k}={v}" for k, v in detail.items())
    conftest.ACCEPTANCE_LINES[num] = (f"PASS criterion {num:2d} ({title}) "
                                      f"[{time.perf_counter() - t0:.1f}s] {extra}").rstrip()


def random_graph(rng, n, p, lo=0.5):
    edges = [(a, b, float(rng.uniform(lo, 1.0))) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return WeightedGraph.from_edges(edges, nodes=range(n))


def test_c01_semantic_preservation():
    with criterion(1, "semantic preservation, levels 0-3") as d:
        t0 = time.perf_counter()
        backends = [random_connected_backend(8, seed=s) for s in range(5)]
        rng = np.random.default_rng(0)
        compiles = failures = 0
        for i in range(200):
            c = random_circuit(int(rng.integers(1, 6)), int(rng.integers(0, 31)), seed=i)
            for b in backends:
                for level in range(4):
                    r = transpile(c, b, level=level, seed=i)
                    out = r.circuit
                    equiv = equivalent_up_to_layout(c, out, r.initial_layout, r.final_layout, tol=1e-6)
                    checks = {k for k, _ in verify_program(out, b).violations}
                    basis_ok = {g.name for g in out.gates()} <= set(b.basis_gates)
                    # an empty input legitimately stays empty
                    coupling_ok = not checks - ({"non_empty"} if not c.gates() else set())
                    compiles += 1
                    failures += not (equiv and basis_ok and coupling_ok)
        elapsed = time.perf_counter() - t0
        d.update(compiles=compiles, failures=failures)
        assert failures == 0, f"{failures}/{compiles} compiles failed"
        assert elapsed < 120, f"runtime {elapsed:.1f}s >= 120s"


def test_c02_synthesis():
    with criterion(2, "ZYZ/KAK synthesis") as d:
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        worst, max_cx = 0.0, 0
        for _ in range(1000):
            u4 = unitary_group.rvs(4, random_state=rng)
            u4 = u4 / np.linalg.det(u4) ** 0.25
            seq = decompose_two_qubit_kak(u4)
            worst = max(worst, phase_free_distance(big_endian_unitary(seq, 2), u4))
            max_cx = max(max_cx, cnot_count(seq))
            u2 = unitary_group.rvs(2, random_state=rng)
            u2 = u2 / np.sqrt(np.linalg.det(u2))
            worst = max(worst, phase_free_distance(big_endian_unitary(decompose_one_qubit_zyz(u2), 1), u2))
        elapsed = time.perf_counter() - t0
        d.update(max_error=f"{worst:.1e}", max_cnots=max_cx)
        assert worst < 1e-8
        assert max_cx <= 3
        assert cnot_count(decompose_two_qubit_kak(np.eye(4))) == 0
        assert cnot_count(decompose_two_qubit_kak(reference_matrix("cx"))) == 1
        assert elapsed < 30, f"runtime {elapsed:.1f}s >= 30s"


def test_c03_matrices():
    with criterion(3, "distance/fidelity matrices vs oracles") as d:
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(1, 9))
            g = random_graph(rng, n, 0.4)
            oracle = bfs_distances(n, list(g.edges))
            oracle[oracle < 0] = UNREACHABLE
            assert (np.asarray(distance_matrix(g)) == oracle).all()
            fo = max_product_paths(n, [(a, b, w) for (a, b), w in g.edges.items()])
            worst = max(worst, float(np.max(np.abs(np.asarray(fidelity_matrix(g).values) - fo))))
        d.update(max_fidelity_error=f"{worst:.1e}")
        assert worst <= 1e-12


def test_c04_heuristics():
    with criterion(4, "H_M in S_D, uniform-fidelity swap parity") as d:
        steps = 0
        # membership is checked with the flat-noise shortcut off so every step really runs H_M
        cfg = RoutingConfig(flat_noise_fallback=False)
        for s in range(30):
            b = random_connected_backend(8, seed=s, extra_edges=2)
            c = random_circuit(int(2 + s % 7), 40, seed=s)
            dag = unroll_to_two_qubit(to_dag(c))
            res = sabre_route(dag, Model(b), "H_M", Layout.trivial(c.num_qubits), seed=s, config=cfg, record=True)
            for step in res.steps:
                assert step.chosen in step.s_d
            steps += len(res.steps)
        same = 0
        for s in range(20):
            doc = lattice_chip(3, 3, seed=s)
            for e in doc["coupling_list"]:
                e[2] = 0.97
            b = validate_chip_doc(doc)
            c = random_circuit(9, 50, seed=100 + s, gate_set=("cx", "cz", "rz"))
            dag = to_dag(c)
            hd = sabre_route(dag, Model(b), "H_D", Layout.trivial(9), seed=s).swaps
            hm = sabre_route(dag, Model(b), "H_M", Layout.trivial(9), seed=s).swaps
            assert hd == hm, f"uniform chip {s}: H_D {hd} swaps vs H_M {hm}"
            same += 1
        d.update(steps=steps, uniform_cases=same)
        assert steps > 0


def test_c05_noise_awareness():
    with criterion(5, "median cost H_M <= H_D on 6x6 lattice") as d:
        t0 = time.perf_counter()
        b = validate_chip_doc(lattice_chip(6, 6, seed=0, fid_range=(0.90, 0.999)))
        med = {}
        for h in ("H_D", "H_M"):
            flow = Strategy("fidelity", h, "degree").passflow()
            costs = []
            for i in range(50):
                c = random_circuit(10, 60, seed=1000 + i)
                r = transpile(c, b, passflow=flow, seed=i)
                costs.append(circuit_cost(r.circuit, b, K=0.995, f1q=0.996))
            med[h] = statistics.median(costs)
        elapsed = time.perf_counter() - t0
        d.update(H_D=f"{med['H_D']:.3f}", H_M=f"{med['H_M']:.3f}")
        assert med["H_M"] <= med["H_D"], f"H_M {med['H_M']:.4f} > H_D {med['H_D']:.4f}"
        assert elapsed < 300


def test_c06_substructure_mining(tmp_path):
    with criterion(6, "substructure mining and DB rebuild") as d:
        rng = np.random.default_rng(6)
        mined = 0
        for s in range(20):
            g = random_graph(rng, 10, 0.3, lo=0.8)
            if not g.is_connected():
                continue
            for strat in ("fidelity", "degree", "random"):
                for n, subs in find_substructures(g, 10, strategies={strat}, seed=s).items():
                    avgs = [x.avg_fidelity for x in subs]
                    assert avgs == sorted(avgs, reverse=True)
                    for x in subs:
                        assert len(set(x.qubits)) == n and is_connected(x.qubits, list(g.edges))
                        mined += 1
        hand = find_substructures(WeightedGraph.from_edges([(0, 1, 0.99), (1, 2, 0.98), (2, 3, 0.50)]), 3,
                                  strategies={"fidelity"})
        assert [x.qubits for x in hand[3]] == [(0, 1, 2), (1, 2, 3)]
        doc = lattice_chip(4, 4, seed=6, name="lat")
        ResourceDB(tmp_path / "a").register_chip("lat", doc)
        first = {p.relative_to(tmp_path / "a"): p.read_bytes() for p in (tmp_path / "a").rglob("*.json")}
        again = ResourceDB(tmp_path / "a")
        again.register_chip("lat", doc)
        ResourceDB(tmp_path / "b").register_chip("lat", doc)
        for root in ("a", "b"):
            assert {p.relative_to(tmp_path / root): p.read_bytes()
                    for p in (tmp_path / root).rglob("*.json")} == first
        d.update(substructures=mined)


def test_c07_selector():
    with criterion(7, "selector: witness, kernel, isomorphism") as d:
        db = ResourceDB()
        db.register_chip("baihua_like", baihua_like_chip())
        g = _circuit_graph(ladder_demo_circuit())
        v, witness = select_structure_first(db, SelectionRequest(6, g, "structure"))
        assert witness is not None and sorted(v.qubits) == sorted(BAIHUA_BLOCK)
        res = call_compiler_api(db, circuit=emit_qasm(ladder_demo_circuit()), vqpu_preferred="structure")
        assert res.ok and res.info["swaps"] == 0
        rng = np.random.default_rng(7)
        for _ in range(100):
            g1 = random_graph(rng, int(rng.integers(2, 8)), 0.5, lo=0.1)
            g2 = random_graph(rng, int(rng.integers(2, 8)), 0.5, lo=0.1)
            assert wl_kernel(g1, g2) == pytest.approx(wl_kernel(g2, g1), rel=1e-12, abs=1e-12)
            w = float(rng.uniform(-3, 3))
            assert edge_similarity(w, w) == 1.0
        assert wl_kernel(WeightedGraph.from_edges([(0, 1, 1.0)]), WeightedGraph.from_edges([(0, 1, 1.0)]),
                         KernelConfig(iterations=1)) == 2
        iso = 0
        for _ in range(50):
            n = int(rng.integers(1, 8))
            g1 = random_graph(rng, n, 0.45)
            if rng.random() < 0.5:
                perm = rng.permutation(n)
                g2 = WeightedGraph.from_edges([(int(perm[a]), int(perm[b]), w) for (a, b), w in g1.edges.items()],
                                              nodes=range(n))
            else:
                g2 = random_graph(rng, n, 0.45)
            verdict = graph_isomorphic(g1, g2) is not None
            assert verdict == brute_isomorphic(g1.nodes, list(g1.edges), g2.nodes, list(g2.edges))
            iso += verdict
        d.update(isomorphic_pairs=f"{iso}/50")


def test_c08_metrics():
    with criterion(8, "Hellinger and cost fixtures") as d:
        assert abs(hellinger_fidelity({"0": 0.5, "1": 0.5}, {"0": 1.0}) - 0.5) <= 1e-12
        assert abs(hellinger_fidelity({"0": 0.3, "1": 0.7}, {"0": 0.3, "1": 0.7}) - 1.0) <= 1e-12
        assert abs(hellinger_fidelity({"0": 1.0}, {"1": 1.0})) <= 1e-12
        b = Backend("pair", 2, [(0, 1, 0.99)])
        cost = circuit_cost(Circuit.empty(2).add("cx", 0, 1), b, K=0.995)
        assert abs(cost - (-math.log(0.995) - math.log(0.99))) <= 1e-9
        assert abs(cost - 0.015063) <= 1e-6
        d.update(cost=f"{cost:.6f}")


def test_c09_anchored_fixtures():
    with criterion(9, "anchored fixtures") as d:
        gqc = WeightedGraph.from_edges([(1, 3, 1), (1, 0, 1), (1, 2, 1), (3, 0, 1), (3, 2, 1)])
        gv = WeightedGraph.from_edges([(2, 0, 1), (2, 3, 1), (2, 1, 1), (0, 3, 1)])
        assert initial_layout(gqc, gv, "degree").as_dict() == {1: 2, 3: 0, 0: 3, 2: 1}

        basis = CX_BASIS + ["h"]
        swap = from_dag(unroll_to_basis(to_dag(Circuit.empty(2).add("swap", 0, 1)), basis))
        assert swap.instructions == [Instruction.gate("cx", (0, 1)), Instruction.gate("cx", (1, 0)),
                                     Instruction.gate("cx", (0, 1))]
        cz = from_dag(unroll_to_basis(to_dag(Circuit.empty(2).add("cz", 0, 1)), basis))
        assert cz.instructions == [Instruction.gate("h", (1,)), Instruction.gate("cx", (0, 1)),
                                   Instruction.gate("h", (1,))]

        th = ParamExpr.symbol("theta")
        c = Circuit.empty(2).add("rzz", 0, 1, params=[th]).add("rzz", 0, 1, params=[math.pi])
        merged = from_dag(fuse_1q(cancel_inverses(unroll_to_basis(to_dag(c), CX_BASIS))))
        assert merged.instructions == [Instruction.gate("cx", (0, 1)), Instruction.gate("rz", (1,), (th + math.pi,)),
                                       Instruction.gate("cx", (0, 1))]

        g = circuit_weighted_graph(ladder_demo_circuit())
        assert dict(g.edges) == {(0, 1): 2, (1, 4): 2, (1, 2): 1, (0, 3): 1, (2, 5): 1, (3, 4): 1, (4, 5): 1}
        d.update(fixtures=4)


def test_c10_end_to_end_cli(tmp_path, capsys):
    with criterion(10, "CLI update-chip + compile on Baihua-like chip") as d:
        chip = tmp_path / "baihua.json"
        chip.write_text(json.dumps(baihua_like_chip()))
        src = tmp_path / "fig.qasm"
        src.write_text(emit_qasm(ladder_demo_circuit()))
        db = tmp_path / "db"
        t0 = time.perf_counter()
        assert main(["update-chip", "--name", "baihua_like", "--file", str(chip), "--db", str(db)]) == 0
        assert main(["compile", "--qasm", str(src), "--db", str(db), "--report", "json"]) == 0
        elapsed = time.perf_counter() - t0
        out = capsys.readouterr().out
        doc = json.loads(out[out.index("{"):])
        assert doc["verification"]["ok"]
        rows = doc["compiled_info"]["report"]["passes"]
        assert rows and all({"seconds", "pre_depth", "post_depth", "pre_counts", "post_counts"} <= set(r)
                            for r in rows)
        d.update(seconds=f"{elapsed:.2f}", passes=len(rows))
        assert elapsed < 10, f"runtime {elapsed:.1f}s >= 10s"
