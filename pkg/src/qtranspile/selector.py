"""Choosing a virtual QPU for a task: fidelity-first and structure-first
selection, exact graph isomorphism and a Weisfeiler–Lehman edge kernel."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import WeightedGraph
from .resources import ResourceDB, VQPU


class NoCapacityError(ValueError):
    pass


@dataclass
class SelectionRequest:
    num_qubits: int
    circuit_graph: Optional[WeightedGraph] = None
    strategy: str = "fidelity"
    chip: Optional[str] = None

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError("a request needs at least one qubit")
        if self.strategy not in ("fidelity", "structure"):
            raise ValueError(f"unknown selection strategy {self.strategy!r}")


@dataclass
class KernelConfig:
    iterations: int = 3
    weighted: bool = True

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("kernel needs at least one iteration")


def _candidates(db: ResourceDB, req: SelectionRequest) -> list[VQPU]:
    if req.chip is not None:
        rec = db.chip(req.chip)
        if rec.qpu.status != "online":
            raise NoCapacityError(f"chip {req.chip!r} is offline")
        chips = [rec]
    else:
        chips = db.online_chips()
    out: list[VQPU] = []
    for rec in chips:
        out.extend(db.vqpus(rec.qpu.name, req.num_qubits))
    if not out:
        raise NoCapacityError(f"no online chip offers a {req.num_qubits}-qubit VQPU")
    # best overall fidelity first; deterministic ties
    out.sort(key=lambda v: (-v.product_fidelity, -v.avg_fidelity, v.parent_name, v.qubits))
    return out


def select_fidelity_first(db: ResourceDB, req: SelectionRequest) -> VQPU:
    """VQPU of exactly the requested size with the largest product of
    coupler fidelities (single-qubit fidelity for one-qubit requests)."""
    return _candidates(db, req)[0]


# --- isomorphism ---------------------------------------------------------------

def graph_isomorphic(g1: WeightedGraph, g2: WeightedGraph) -> Optional[dict[int, int]]:
    """Structure-only isomorphism by backtracking.

    Nodes of ``g1`` are matched in a connectivity-first order; a candidate
    must have the same degree and the same adjacency to every node already
    matched.  Returns a bijection g1 -> g2 or None.
    """
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return None
    d1, d2 = g1.degrees(), g2.degrees()
    if sorted(d1.values()) != sorted(d2.values()):
        return None
    a1, a2 = g1.adjacency(), g2.adjacency()

    order: list[int] = []
    placed: set[int] = set()
    remaining = sorted(g1.nodes, key=lambda n: (-d1[n], n))
    while remaining:
        # next node: most links into the ordered set, then highest degree
        best = max(remaining, key=lambda n: (len(a1[n] & placed), d1[n], -n))
        order.append(best)
        placed.add(best)
        remaining.remove(best)

    targets = sorted(g2.nodes)
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(u: int, x: int) -> bool:
        if d1[u] != d2[x]:
            return False
        for w, y in mapping.items():
            if (w in a1[u]) != (y in a2[x]):
                return False
        return True

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        u = order[i]
        for x in targets:
            if x in used or not consistent(u, x):
                continue
            mapping[u] = x
            used.add(x)
            if extend(i + 1):
                return True
            del mapping[u]
            used.discard(x)
        return False

    return dict(sorted(mapping.items())) if extend(0) else None


# --- WL kernel -------------------------------------------------------------------

def _relabel(graphs: list[WeightedGraph], labels: list[dict[int, int]]) -> list[dict[int, int]]:
    """One WL refinement step with a relabel table shared by all graphs."""
    sigs = []
    for g, lab in zip(graphs, labels):
        adj = g.adjacency()
        sigs.append({n: (lab[n], tuple(sorted(lab[m] for m in adj[n]))) for n in g.nodes})
    table = {s: i for i, s in enumerate(sorted({s for sig in sigs for s in sig.values()}))}
    return [{n: table[s] for n, s in sig.items()} for sig in sigs]


def _edge_groups(g: WeightedGraph, lab: dict[int, int], both: bool) -> dict[tuple[int, int], list[float]]:
    groups: dict[tuple[int, int], list[float]] = defaultdict(list)
    for (u, v), w in g.edges.items():
        groups[(lab[u], lab[v])].append(w)
        if both:
            groups[(lab[v], lab[u])].append(w)
    return groups


def _level(g1, g2, l1, l2, weighted: bool) -> float:
    """k_t: sum over edge pairs of endpoint-label agreement, counting both
    orientations of each g2 edge, times f(w1, w2)."""
    e1 = _edge_groups(g1, l1, both=False)
    e2 = _edge_groups(g2, l2, both=True)
    total = 0.0
    for key, w1 in e1.items():
        w2 = e2.get(key)
        if not w2:
            continue
        if weighted:
            diff = np.subtract.outer(np.asarray(w1), np.asarray(w2))
            total += float(np.exp(-(diff ** 2)).sum())
        else:
            total += len(w1) * len(w2)
    return total


def edge_similarity(w1: float, w2: float) -> float:
    """f(w1, w2) = 1 / exp((w1 - w2)^2)."""
    return math.exp(-((w1 - w2) ** 2))


def wl_kernel(g1: WeightedGraph, g2: WeightedGraph, cfg: Optional[KernelConfig] = None) -> float:
    """K = sum_{t=1..T} k_t with initial labels = node degree and k_t using
    the labels of refinement step t-1."""
    cfg = cfg or KernelConfig()
    if not g1.nodes or not g2.nodes:
        raise ValueError("wl_kernel needs non-empty graphs")
    d1, d2 = g1.degrees(), g2.degrees()
    labels = [dict(d1), dict(d2)]
    total = 0.0
    for t in range(cfg.iterations):
        total += _level(g1, g2, labels[0], labels[1], cfg.weighted)
        if t + 1 < cfg.iterations:
            labels = _relabel([g1, g2], labels)
    return total


def select_structure_first(db: ResourceDB, req: SelectionRequest,
                           cfg: Optional[KernelConfig] = None) -> tuple[VQPU, Optional[dict[int, int]]]:
    """An isomorphic VQPU with its witness map (circuit qubit -> virtual
    qubit) if one exists, else the VQPU with the largest kernel value
    against the circuit graph.  Edge weights of both graphs are normalized
    by their maximum.  Ties go to the higher product fidelity."""
    if req.circuit_graph is None:
        raise ValueError("structure-first selection needs the circuit graph")
    cands = _candidates(db, req)
    gqc = req.circuit_graph.normalized()
    for v in cands:
        witness = graph_isomorphic(gqc, v.graph())
        if witness is not None:
            return v, witness
    if not gqc.edges:
        return cands[0], None
    best, best_score = None, -math.inf
    for v in cands:  # already in descending fidelity order, so '>' keeps the fitter tie
        score = wl_kernel(gqc, v.graph().normalized(), cfg)
        if score > best_score:
            best, best_score = v, score
    return best, None
