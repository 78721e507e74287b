"""SWAP-based routing with the distance heuristic H_D, the fidelity
heuristic H_Fi and the mixed heuristic H_M, plus reverse-traversal layout
refinement.

Scores for a candidate swap (a, b), with the layout tentatively swapped:

    H_D  = max(decay[a], decay[b]) * (mean_F D + W * mean_E D)    (minimize)
    H_Fi = max(decay[a], decay[b]) * (mean_F Fi + W * mean_E Fi)  (maximize)

where F is the blocked front layer, E the lookahead (extended) set and an
empty E contributes 0.  H_M first takes S_D, the set of swaps with the
minimal H_D value (exact equality); a single member is returned as is,
otherwise the member with the largest H_Fi wins.  Remaining ties are broken
by the seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..circuit import Instruction
from ..dag import CircuitDAG
from ..graph import WeightedGraph, edge_key
from .layout import Layout, initial_layout
from .matrices import UNREACHABLE

HEURISTICS = ("H_D", "H_Fi", "H_M")


class RoutingError(RuntimeError):
    pass


@dataclass
class RoutingConfig:
    extended_size: int = 20
    lookahead_weight: float = 0.5
    decay_delta: float = 0.001
    decay_reset: int = 5
    # swaps without executing a gate before a front gate is forced along a
    # shortest path; None means 10 * number of physical qubits
    stall_limit: Optional[int] = None
    # on a chip whose couplers all share one fidelity, Fi carries no noise
    # information, so H_M reduces to H_D
    flat_noise_fallback: bool = True


@dataclass
class RoutingState:
    l2p: list[int]
    p2l: list[int]
    front: list[tuple[int, int]]
    extended: list[tuple[int, int]]
    decay: list[float]


@dataclass
class StepRecord:
    candidates: list[tuple[int, int]]
    hd_scores: list[float]
    s_d: list[tuple[int, int]]
    chosen: tuple[int, int]


@dataclass
class RoutingResult:
    dag: CircuitDAG
    initial_layout: Layout
    final_layout: Layout
    swaps: int
    steps: list[StepRecord] = field(default_factory=list)

    def __iter__(self):
        # allows ``routed, final = sabre_route(...)``
        return iter((self.dag, self.final_layout))


def _mean(vals: list[float]) -> float:
    return sum(vals) / len(vals) if vals else 0.0


def heuristic_score(swap: tuple[int, int], st: RoutingState, table, kind: str,
                    weight: float = 0.5) -> float:
    """H_D or H_Fi for one candidate.  ``table`` is the distance matrix for
    H_D and the fidelity values for H_Fi (nested lists or arrays)."""
    if kind not in ("H_D", "H_Fi"):
        raise ValueError(f"heuristic_score evaluates H_D or H_Fi, got {kind!r}")
    a, b = swap
    l2p = st.l2p

    def pos(q: int) -> int:
        p = l2p[q]
        return b if p == a else a if p == b else p

    front = [table[pos(x)][pos(y)] for x, y in st.front]
    ext = [table[pos(x)][pos(y)] for x, y in st.extended]
    decay = max(st.decay[a], st.decay[b])
    return decay * (_mean(front) + weight * _mean(ext))


def select_swap(candidates: list[tuple[int, int]], st: RoutingState, dist, fid, kind: str,
                rng: np.random.Generator, weight: float = 0.5):
    """Return ``(chosen, s_d, hd_scores)``; ``s_d`` and ``hd_scores`` are
    empty for H_Fi."""
    if not candidates:
        raise RoutingError("no swap candidates")
    if kind not in HEURISTICS:
        raise ValueError(f"unknown heuristic {kind!r}")
    hd: list[float] = []
    s_d: list[tuple[int, int]] = []
    if kind in ("H_D", "H_M"):
        hd = [heuristic_score(c, st, dist, "H_D", weight) for c in candidates]
        best = min(hd)
        s_d = [c for c, s in zip(candidates, hd) if s == best]
        if kind == "H_D" or len(s_d) == 1:
            return s_d[int(rng.integers(len(s_d)))] if len(s_d) > 1 else s_d[0], s_d, hd
        pool = s_d
    else:
        pool = candidates
    hf = [heuristic_score(c, st, fid, "H_Fi", weight) for c in pool]
    top = max(hf)
    ties = [c for c, s in zip(pool, hf) if s == top]
    chosen = ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]
    return chosen, s_d, hd


def _emit(out: CircuitDAG, instr: Instruction, l2p: list[int]) -> None:
    out.apply(instr.remap({q: l2p[q] for q in instr.qubits}))


def sabre_route(dag: CircuitDAG, model, heuristic: str = "H_D", layout: Optional[Layout] = None,
                seed: int = 0, config: Optional[RoutingConfig] = None,
                record: bool = False) -> RoutingResult:
    """Insert SWAPs so every two-qubit gate acts on coupled physical qubits.

    The output DAG is over all physical qubits of ``model.backend``.  The
    given layout is completed to a full permutation (ancillas on the free
    physical qubits in ascending order).
    """
    cfg = config or RoutingConfig()
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    kind = heuristic
    if kind == "H_M" and cfg.flat_noise_fallback and model.flat_noise():
        kind = "H_D"
    N = model.num_physical
    n = dag.num_qubits
    if n > N:
        raise RoutingError(f"circuit has {n} qubits, device has {N}")
    start = (layout or Layout.trivial(n)).complete(N)
    l2p = [start.physical(q) for q in range(N)]
    p2l = [0] * N
    for q, p in enumerate(l2p):
        p2l[p] = q

    dist = model.distance_matrix.tolist()
    fid = model.fidelity_matrix.values.tolist()
    neighbors = model.neighbors()
    coupled = {edge_key(a, b) for a, b in model.backend.edge_fidelities()}
    rng = np.random.default_rng(seed)
    stall_limit = cfg.stall_limit if cfg.stall_limit is not None else 10 * N

    ops = dag.op_nodes()
    index = {node.id: i for i, node in enumerate(ops)}
    instrs = [node.instr for node in ops]
    for instr in instrs:
        if instr.kind == "gate" and len(instr.qubits) > 2:
            raise RoutingError(f"gate '{instr.name}' acts on more than two qubits; unroll first")
    remaining = [len(dag.op_predecessors(node.id)) for node in ops]
    succs = [[index[s] for s in dag.op_successors(node.id)] for node in ops]
    front = [i for i, r in enumerate(remaining) if r == 0]

    out = dag.copy_empty(num_qubits=N)
    decay = [1.0] * N
    swaps = 0
    since_reset = 0
    stall = 0
    steps: list[StepRecord] = []

    def blocked(i: int) -> bool:
        instr = instrs[i]
        if instr.kind != "gate" or len(instr.qubits) != 2:
            return False
        a, b = instr.qubits
        return edge_key(l2p[a], l2p[b]) not in coupled

    def do_swap(a: int, b: int) -> None:
        out.apply(Instruction.gate("swap", (a, b)))
        qa, qb = p2l[a], p2l[b]
        p2l[a], p2l[b] = qb, qa
        l2p[qa], l2p[qb] = b, a

    while front:
        progressed = True
        while progressed:
            progressed = False
            waiting = []
            for i in front:
                if blocked(i):
                    waiting.append(i)
                    continue
                _emit(out, instrs[i], l2p)
                progressed = True
                for s in succs[i]:
                    remaining[s] -= 1
                    if remaining[s] == 0:
                        waiting.append(s)
            front = waiting
            if progressed:
                stall = 0
        if not front:
            break

        pairs = [instrs[i].qubits for i in front]
        for x, y in pairs:
            if dist[l2p[x]][l2p[y]] >= UNREACHABLE:
                raise RoutingError(
                    f"logical qubits {x} and {y} sit on disconnected physical qubits {l2p[x]}, {l2p[y]}"
                )

        if stall >= stall_limit:
            # livelock guard: walk the closest front gate together
            i = min(front, key=lambda j: (dist[l2p[instrs[j].qubits[0]]][l2p[instrs[j].qubits[1]]], j))
            x, y = instrs[i].qubits
            while dist[l2p[x]][l2p[y]] > 1:
                px, py = l2p[x], l2p[y]
                step = min(nb for nb in neighbors[px] if dist[nb][py] == dist[px][py] - 1)
                do_swap(px, step)
                swaps += 1
            decay = [1.0] * N
            since_reset = 0
            stall = 0
            continue

        extended: list[tuple[int, int]] = []
        seen = set(front)
        queue = list(front)
        while queue and len(extended) < cfg.extended_size:
            i = queue.pop(0)
            for s in succs[i]:
                if s in seen:
                    continue
                seen.add(s)
                queue.append(s)
                instr = instrs[s]
                if instr.kind == "gate" and len(instr.qubits) == 2:
                    extended.append(instr.qubits)
                    if len(extended) >= cfg.extended_size:
                        break

        cands = sorted({edge_key(l2p[q], nb) for x, y in pairs for q in (x, y) for nb in neighbors[l2p[q]]})
        state = RoutingState(l2p, p2l, list(pairs), extended, decay)
        chosen, s_d, hd = select_swap(cands, state, dist, fid, kind, rng, cfg.lookahead_weight)
        if record:
            steps.append(StepRecord(cands, hd, s_d, chosen))
        do_swap(*chosen)
        swaps += 1
        stall += 1
        decay[chosen[0]] += cfg.decay_delta
        decay[chosen[1]] += cfg.decay_delta
        since_reset += 1
        if since_reset >= cfg.decay_reset:
            decay = [1.0] * N
            since_reset = 0

    final = Layout({q: l2p[q] for q in range(N)})
    return RoutingResult(out, start, final, swaps, steps)


def circuit_graph_of(dag: CircuitDAG) -> WeightedGraph:
    """Interaction graph with a node for every logical qubit (idle included)."""
    g = WeightedGraph()
    for q in range(dag.num_qubits):
        g.add_node(q)
    for node in dag.op_nodes():
        instr = node.instr
        if instr.kind == "gate" and len(instr.qubits) == 2:
            a, b = instr.qubits
            key = edge_key(a, b)
            g.edges[key] = g.edges.get(key, 0.0) + 1.0
    return g


def mean_mapped_fidelity(gqc: WeightedGraph, layout: Layout, fid: np.ndarray) -> float:
    if not gqc.edges:
        return 1.0
    return float(np.mean([fid[layout.physical(u), layout.physical(v)] for u, v in gqc.edges]))


def sabre_layout(dag: CircuitDAG, model, heuristic: str = "H_D", iterations: int = 1,
                 seed: int = 0, strategy: str = "degree", initial: Optional[Layout] = None,
                 config: Optional[RoutingConfig] = None) -> Layout:
    """Reverse-traversal refinement of a starting layout.

    Starting from ``initial`` (or the structure-aware ``initial_layout`` for
    ``strategy``), route forward then backward ``iterations`` times, feeding
    each final layout into the next pass.  Every layout that started a
    forward pass is scored by its forward SWAP count; the lowest wins, ties
    going to the higher mean Fi over the circuit's interaction edges.
    With ``iterations=0`` the starting layout is returned unchanged.
    """
    N = model.num_physical
    gqc = circuit_graph_of(dag)
    if initial is None:
        initial = initial_layout(gqc, model.backend.coupling_graph(), strategy, seed)
    if iterations <= 0:
        return initial
    reverse = dag.reverse_ops()
    fid = model.fidelity_matrix.values
    cands: list[tuple[int, float, int, Layout]] = []
    current = initial.complete(N)
    for it in range(iterations + 1):
        fwd = sabre_route(dag, model, heuristic, current, seed, config)
        cands.append((fwd.swaps, -mean_mapped_fidelity(gqc, current, fid), it, current))
        if it == iterations:
            break
        back = sabre_route(reverse, model, heuristic, fwd.final_layout, seed, config)
        current = back.final_layout
    best = min(cands, key=lambda c: c[:3])
    return best[3]
