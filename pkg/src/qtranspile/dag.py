"""Directed acyclic graph form of a circuit.

Each qubit and clbit is a *wire* running from an input sentinel node to an
output sentinel node; every operation sits on the wires it touches.  The
graph is stored as per-wire predecessor/successor links, so removing or
splicing in operations is O(arity).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .circuit import Circuit, Instruction

Wire = tuple[str, int]  # ("q", i) or ("c", j)


def instr_wires(instr: Instruction) -> list[Wire]:
    return [("q", q) for q in instr.qubits] + [("c", c) for c in instr.clbits]


@dataclass
class DAGNode:
    id: int
    kind: str  # "in" | "out" | "op"
    wire: Optional[Wire] = None
    instr: Optional[Instruction] = None

    @property
    def wires(self) -> list[Wire]:
        if self.kind == "op":
            return instr_wires(self.instr)
        return [self.wire]


class CircuitDAG:
    def __init__(self, num_qubits: int, num_clbits: int = 0,
                 qregs=None, cregs=None, metadata=None):
        self.num_qubits = num_qubits
        self.num_clbits = num_clbits
        self.qregs = list(qregs) if qregs is not None else ([("q", num_qubits)] if num_qubits else [])
        self.cregs = list(cregs) if cregs is not None else ([("c", num_clbits)] if num_clbits else [])
        self.metadata = dict(metadata or {})
        self.nodes: dict[int, DAGNode] = {}
        self._next: dict[int, dict[Wire, int]] = {}
        self._prev: dict[int, dict[Wire, int]] = {}
        self.input: dict[Wire, int] = {}
        self.output: dict[Wire, int] = {}
        self._counter = 0
        for w in self.wires:
            i = self._new_node("in", wire=w)
            o = self._new_node("out", wire=w)
            self.input[w], self.output[w] = i, o
            self._next[i][w] = o
            self._prev[o][w] = i

    @property
    def wires(self) -> list[Wire]:
        return [("q", q) for q in range(self.num_qubits)] + [("c", c) for c in range(self.num_clbits)]

    def _new_node(self, kind: str, wire=None, instr=None) -> int:
        nid = self._counter
        self._counter += 1
        self.nodes[nid] = DAGNode(nid, kind, wire, instr)
        self._next[nid] = {}
        self._prev[nid] = {}
        return nid

    def copy_empty(self, num_qubits: Optional[int] = None) -> "CircuitDAG":
        """An empty DAG with the same clbits (and qubits unless overridden)."""
        if num_qubits is None:
            return CircuitDAG(self.num_qubits, self.num_clbits, self.qregs, self.cregs, self.metadata)
        return CircuitDAG(num_qubits, self.num_clbits, None, self.cregs, self.metadata)

    def copy(self) -> "CircuitDAG":
        out = self.copy_empty()
        for node in self.op_nodes():
            out.apply(node.instr)
        return out

    # construction / mutation
    def apply(self, instr: Instruction) -> int:
        """Append ``instr`` at the end of its wires."""
        nid = self._new_node("op", instr=instr)
        for w in instr_wires(instr):
            out = self.output[w]
            last = self._prev[out][w]
            self._link(last, nid, w)
            self._link(nid, out, w)
        return nid

    def _link(self, a: int, b: int, w: Wire) -> None:
        self._next[a][w] = b
        self._prev[b][w] = a

    def insert_before(self, anchor: int, instr: Instruction) -> int:
        """Insert ``instr`` immediately before ``anchor`` on each of its wires.

        The wires of ``instr`` must be a subset of the anchor's wires.
        """
        anchor_wires = set(self.nodes[anchor].wires)
        nid = self._new_node("op", instr=instr)
        for w in instr_wires(instr):
            if w not in anchor_wires:
                raise ValueError(f"wire {w} not on anchor node")
            before = self._prev[anchor][w]
            self._link(before, nid, w)
            self._link(nid, anchor, w)
        return nid

    def remove(self, nid: int) -> None:
        node = self.nodes[nid]
        if node.kind != "op":
            raise ValueError("cannot remove a sentinel node")
        for w in node.wires:
            a = self._prev[nid][w]
            b = self._next[nid][w]
            self._link(a, b, w)
        del self.nodes[nid], self._next[nid], self._prev[nid]

    def substitute(self, nid: int, instrs: Iterable[Instruction]) -> list[int]:
        """Replace an op node with a sequence of instructions on its wires."""
        new = [self.insert_before(nid, instr) for instr in instrs]
        self.remove(nid)
        return new

    def replace_instr(self, nid: int, instr: Instruction) -> None:
        node = self.nodes[nid]
        if instr_wires(instr) != node.wires:
            raise ValueError("replacement must act on the same wires")
        node.instr = instr

    # queries
    def next_on(self, nid: int, wire: Wire) -> DAGNode:
        return self.nodes[self._next[nid][wire]]

    def prev_on(self, nid: int, wire: Wire) -> DAGNode:
        return self.nodes[self._prev[nid][wire]]

    def successors(self, nid: int) -> list[int]:
        return sorted(set(self._next[nid].values()))

    def predecessors(self, nid: int) -> list[int]:
        return sorted(set(self._prev[nid].values()))

    def op_successors(self, nid: int) -> list[int]:
        return [s for s in self.successors(nid) if self.nodes[s].kind == "op"]

    def op_predecessors(self, nid: int) -> list[int]:
        return [p for p in self.predecessors(nid) if self.nodes[p].kind == "op"]

    def edges(self) -> Iterator[tuple[int, int, Wire]]:
        for a, links in self._next.items():
            for w, b in links.items():
                yield a, b, w

    def topological_nodes(self) -> list[DAGNode]:
        """All nodes, sentinels included, in a deterministic topological order."""
        indeg = {nid: len(set(self._prev[nid].values())) for nid in self.nodes}
        heap = [nid for nid, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            nid = heapq.heappop(heap)
            order.append(self.nodes[nid])
            for s in set(self._next[nid].values()):
                indeg[s] -= 1
                if indeg[s] == 0:
                    heapq.heappush(heap, s)
        if len(order) != len(self.nodes):
            raise RuntimeError("cycle detected in circuit DAG")
        return order

    def op_nodes(self) -> list[DAGNode]:
        return [n for n in self.topological_nodes() if n.kind == "op"]

    def wire_ops(self, wire: Wire) -> list[DAGNode]:
        """Operations on one wire in execution order."""
        out = []
        nid = self._next[self.input[wire]][wire]
        while self.nodes[nid].kind == "op":
            out.append(self.nodes[nid])
            nid = self._next[nid][wire]
        return out

    def front_layer(self) -> list[int]:
        return sorted(
            nid for nid, node in self.nodes.items()
            if node.kind == "op" and not self.op_predecessors(nid)
        )

    def size(self) -> int:
        return sum(1 for n in self.nodes.values() if n.kind == "op")

    def count_ops(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for node in self.nodes.values():
            if node.kind == "op":
                out[node.instr.name] = out.get(node.instr.name, 0) + 1
        return out

    def depth(self) -> int:
        """Number of gate layers under as-soon-as-possible scheduling.
        Barriers and measurements do not count as layers."""
        level: dict[int, int] = {}
        best = 0
        for node in self.topological_nodes():
            preds = self._prev[node.id].values()
            base = max((level[p] for p in preds), default=0)
            here = base + 1 if node.kind == "op" and node.instr.kind == "gate" else base
            level[node.id] = here
            best = max(best, here)
        return best

    def reverse_ops(self) -> "CircuitDAG":
        """A DAG with the same operations in reverse order (structure only;
        gates are not inverted)."""
        out = self.copy_empty()
        for node in reversed(self.op_nodes()):
            out.apply(node.instr)
        return out

    def __len__(self) -> int:
        return self.size()


def to_dag(c: Circuit) -> CircuitDAG:
    dag = CircuitDAG(c.num_qubits, c.num_clbits, c.qregs, c.cregs, c.metadata)
    for instr in c.instructions:
        dag.apply(instr)
    return dag


def from_dag(dag: CircuitDAG) -> Circuit:
    return Circuit(
        list(dag.qregs),
        list(dag.cregs),
        [node.instr for node in dag.op_nodes()],
        dict(dag.metadata),
    )
