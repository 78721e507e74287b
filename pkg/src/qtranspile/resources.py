"""Chip resource virtualization: QPU records, square-lattice embedding,
substructure mining, virtual QPUs and the on-disk resource database.

Database layout (all JSON, UTF-8, keys sorted, compact separators)::

    <db>/index.json           {"version": 1, "chips": {name: {"id", "qubits_num", "status"}}}
    <db>/<name>/record.json   {"version": 1, "qpu": chip document + "id",
                               "stdqpu": {"rows", "cols", "degenerate", "embedding": {q: [r, c]}},
                               "mining": {"seed", "n_max", "top_k", "strategies"},
                               "vqpus": {n: [{"qubits", "edges", "avg_fidelity",
                                              "product_fidelity", "strategy"}]}}

``qubits`` lists physical qubits in ascending order; virtual qubit ``i`` is
``qubits[i]``.  ``edges`` holds ``[vi, vj, fidelity]`` over virtual ids.
Writers hold ``<db>/.lock`` and replace files atomically, so readers see
either the old or the new record.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
from filelock import FileLock

from .backend import Backend, BackendError
from .graph import WeightedGraph, edge_key

DB_VERSION = 1
DEFAULT_N_MAX = 30
DEFAULT_TOP_K = 200
STRATEGIES = ("fidelity", "degree", "random")


class ChipSchemaError(ValueError):
    pass


class DBError(ValueError):
    pass


def validate_chip_doc(doc: Any) -> Backend:
    """Check a chip document against the schema and build its Backend."""
    if not isinstance(doc, dict):
        raise ChipSchemaError("chip document must be a JSON object")
    required = {"name": str, "qubits_num": int, "coupling_list": list, "basis_gates": list}
    for key, typ in required.items():
        if key not in doc:
            raise ChipSchemaError(f"missing field '{key}'")
        if not isinstance(doc[key], typ) or (typ is int and isinstance(doc[key], bool)):
            raise ChipSchemaError(f"field '{key}' must be {typ.__name__}")
    for i, entry in enumerate(doc["coupling_list"]):
        if (not isinstance(entry, (list, tuple)) or len(entry) != 3
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in entry[:2])
                or not isinstance(entry[2], (int, float)) or isinstance(entry[2], bool)):
            raise ChipSchemaError(f"coupling_list[{i}] must be [int, int, float]")
    if not all(isinstance(g, str) for g in doc["basis_gates"]):
        raise ChipSchemaError("basis_gates must be a list of strings")
    sqf = doc.get("single_qubit_fidelity", {})
    if sqf is not None and not isinstance(sqf, dict):
        raise ChipSchemaError("single_qubit_fidelity must be an object")
    for k, v in (sqf or {}).items():
        try:
            int(k)
        except (TypeError, ValueError):
            raise ChipSchemaError(f"single_qubit_fidelity key {k!r} is not a qubit index") from None
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ChipSchemaError(f"single_qubit_fidelity[{k}] must be a number")
    pq = doc.get("priority_qubits")
    if pq is not None and (not isinstance(pq, list) or not all(isinstance(x, int) for x in pq)):
        raise ChipSchemaError("priority_qubits must be a list of ints")
    if "backend_type" in doc and not isinstance(doc["backend_type"], str):
        raise ChipSchemaError("backend_type must be a string")
    try:
        backend = Backend.from_dict(doc)
    except BackendError as exc:
        raise ChipSchemaError(str(exc)) from None
    if pq is not None and any(not 0 <= q < backend.qubits_num for q in pq):
        raise ChipSchemaError("priority_qubits out of range")
    return backend


@dataclass
class QPU:
    backend: Backend
    chip_id: int = 0

    @property
    def name(self) -> str:
        return self.backend.name

    @property
    def chip_type(self) -> str:
        return self.backend.backend_type

    @property
    def qubits_num(self) -> int:
        return self.backend.qubits_num

    @property
    def basis_gates(self) -> list[str]:
        return self.backend.basis_gates

    @property
    def status(self) -> str:
        return self.backend.status

    @property
    def priority_qubits(self) -> list[int]:
        return list(self.backend.priority_qubits or [])

    def graph(self) -> WeightedGraph:
        return self.backend.coupling_graph()

    def active_qubits(self) -> list[int]:
        """Qubits with at least one coupler (all qubits on an uncoupled chip)."""
        g = self.graph()
        if not g.edges:
            return sorted(g.nodes)
        deg = g.degrees()
        return sorted(q for q in g.nodes if deg[q] > 0)


# --- square-lattice embedding ---------------------------------------------

@dataclass
class StdQPU:
    rows: int
    cols: int
    embedding: dict[int, tuple[int, int]]
    degenerate: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": self.rows, "cols": self.cols, "degenerate": self.degenerate,
            "embedding": {str(q): list(rc) for q, rc in sorted(self.embedding.items())},
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "StdQPU":
        return cls(doc["rows"], doc["cols"], {int(q): tuple(rc) for q, rc in doc["embedding"].items()},
                   doc["degenerate"])


def build_stdqpu(q: QPU) -> StdQPU:
    """Row-major lattice embedding.

    Tries every column count and keeps those where each coupler joins
    horizontal (same row, indices differ by 1) or vertical (indices differ
    by the column count) neighbors; prefers the squarest, then the widest.
    Chips that fit no lattice get a 1 x N embedding flagged degenerate.
    Uncoupled qubits (holes) are left unmapped.
    """
    n = q.qubits_num
    edges = list(q.backend.edge_fidelities())
    active = q.active_qubits()
    best = None
    for cols in range(1, n + 1):
        ok = all(
            (abs(a - b) == 1 and a // cols == b // cols) or abs(a - b) == cols
            for a, b in edges
        )
        if ok:
            rows = -(-n // cols)
            key = (abs(rows - cols), -cols)
            if best is None or key < best[0]:
                best = (key, rows, cols)
    if best is None:
        return StdQPU(1, n, {p: (0, p) for p in active}, degenerate=True)
    _, rows, cols = best
    return StdQPU(rows, cols, {p: (p // cols, p % cols) for p in active})


# --- substructures ----------------------------------------------------------

@dataclass
class SubQPU:
    parent: str
    qubits: tuple[int, ...]
    graph: WeightedGraph
    strategy: str
    avg_fidelity: float
    product_fidelity: float

    @property
    def size(self) -> int:
        return len(self.qubits)


def _sort_key(sub_qubits: tuple[int, ...], avg: float, prod: float, priority: set[int]):
    return (-avg, -prod, -sum(1 for q in sub_qubits if q in priority), sub_qubits)


def find_substructures(g: WeightedGraph, n_max: int, strategies: Iterable[str] = STRATEGIES,
                       seed: int = 0, top_k: int = DEFAULT_TOP_K, parent: str = "",
                       priority: Iterable[int] = ()) -> dict[int, list[SubQPU]]:
    """Mine connected substructures of every size 1..n_max.

    Size 1: qubits by single-qubit fidelity.  Size 2: couplers by fidelity.
    Size >= 3: for each strategy and each seed coupler (in fidelity order),
    grow a qubit set by repeatedly adding one adjacent qubit, chosen as

    * ``fidelity``: the largest coupler fidelity into the set,
    * ``degree``: the largest degree in the chip graph,
    * ``random``: uniformly at random (seeded),

    recording the set at every size.  Each list is deduplicated by qubit
    set, sorted by average coupler fidelity (descending; ties by product
    fidelity, then priority-qubit count, then qubit tuple) and cut to
    ``top_k``.  Isolated qubits are skipped when the graph has couplers.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    requested = set(strategies)
    unknown = requested - set(STRATEGIES)
    if unknown:
        raise ValueError(f"unknown strategies {sorted(unknown)}")
    strategies = [s for s in STRATEGIES if s in requested]
    priority = set(priority)
    adj = g.adjacency()
    deg = g.degrees()
    nodes = sorted(g.nodes) if not g.edges else sorted(q for q in g.nodes if deg[q] > 0)
    out: dict[int, list[SubQPU]] = {}

    def fid1(q: int) -> float:
        w = g.nodes.get(q)
        return 1.0 if w is None else float(w)

    ones = sorted(nodes, key=lambda q: (-fid1(q), 0 if q in priority else 1, q))
    out[1] = [
        SubQPU(parent, (q,), g.subgraph([q]), "fidelity", fid1(q), fid1(q)) for q in ones[:top_k]
    ]
    if n_max < 2 or not g.edges:
        return out

    seed_edges = sorted(g.edges, key=lambda e: (-g.edges[e], -sum(1 for q in e if q in priority), e))
    out[2] = [
        SubQPU(parent, e, g.subgraph(e), "fidelity", g.edges[e], g.edges[e]) for e in seed_edges[:top_k]
    ]

    found: dict[int, dict[frozenset, tuple[str, float, float]]] = {k: {} for k in range(3, n_max + 1)}
    rng = np.random.default_rng(seed)
    for strategy in strategies:
        for u, v in seed_edges:
            members = {u, v}
            total = g.edges[(u, v)]
            logprod = math.log(g.edges[(u, v)]) if g.edges[(u, v)] > 0 else -math.inf
            count = 1
            # frontier node -> best coupler fidelity into the set
            frontier: dict[int, float] = {}
            for a in (u, v):
                for b in adj[a]:
                    if b not in members:
                        frontier[b] = max(frontier.get(b, 0.0), g.weight(a, b))
            for size in range(3, n_max + 1):
                if not frontier:
                    break
                cands = sorted(frontier)
                if strategy == "fidelity":
                    pick = min(cands, key=lambda x: (-frontier[x], x))
                elif strategy == "degree":
                    pick = min(cands, key=lambda x: (-deg[x], -frontier[x], x))
                else:
                    pick = cands[int(rng.integers(len(cands)))]
                del frontier[pick]
                for b in adj[pick]:
                    w = g.weight(pick, b)
                    if b in members:
                        total += w
                        logprod += math.log(w) if w > 0 else -math.inf
                        count += 1
                    else:
                        frontier[b] = max(frontier.get(b, 0.0), w)
                members.add(pick)
                key = frozenset(members)
                if key not in found[size]:
                    found[size][key] = (strategy, total / count, math.exp(logprod))

    for size, table in found.items():
        if not table:
            continue
        ranked = sorted(
            ((tuple(sorted(k)), s, a, p) for k, (s, a, p) in table.items()),
            key=lambda t: _sort_key(t[0], t[2], t[3], priority),
        )[:top_k]
        out[size] = [SubQPU(parent, qs, g.subgraph(qs), s, a, p) for qs, s, a, p in ranked]
    return out


# --- virtual QPUs -----------------------------------------------------------

@dataclass
class VQPU:
    parent_name: str
    parent_id: int
    qubits: tuple[int, ...]
    edges: list[tuple[int, int, float]]
    avg_fidelity: float
    product_fidelity: float
    strategy: str = "fidelity"
    node_fidelity: list[float] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.qubits)

    @property
    def v2p(self) -> dict[int, int]:
        return {v: p for v, p in enumerate(self.qubits)}

    def graph(self) -> WeightedGraph:
        g = WeightedGraph()
        for v in range(self.size):
            g.add_node(v, self.node_fidelity[v] if self.node_fidelity else None)
        for a, b, f in self.edges:
            g.add_edge(a, b, f)
        return g

    def backend(self, basis_gates: Optional[list[str]] = None, max_gate_count: Optional[int] = None) -> Backend:
        """The VQPU seen as a device over its virtual qubits."""
        return Backend(
            name=f"{self.parent_name}:{'-'.join(map(str, self.qubits))}",
            qubits_num=self.size,
            coupling_list=list(self.edges),
            basis_gates=list(basis_gates or ["cx", "rx", "ry", "rz"]),
            single_qubit_fidelity={v: f for v, f in enumerate(self.node_fidelity)},
            max_gate_count=max_gate_count,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "qubits": list(self.qubits),
            "edges": [[a, b, f] for a, b, f in self.edges],
            "avg_fidelity": self.avg_fidelity,
            "product_fidelity": self.product_fidelity,
            "strategy": self.strategy,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any], parent: QPU) -> "VQPU":
        qubits = tuple(doc["qubits"])
        return cls(parent.name, parent.chip_id, qubits, [tuple(e) for e in doc["edges"]],
                   doc["avg_fidelity"], doc["product_fidelity"], doc["strategy"],
                   [parent.backend.qubit_fidelity(p) for p in qubits])


def vqpu_from_qubits(parent: QPU, qubits: Iterable[int], strategy: str = "pinned") -> VQPU:
    """VQPU over the induced subgraph of the given physical qubits."""
    qs = tuple(sorted(set(qubits)))
    index = {p: v for v, p in enumerate(qs)}
    edges = sorted(
        (index[a], index[b], f) for (a, b), f in parent.backend.edge_fidelities().items()
        if a in index and b in index
    )
    if edges:
        avg = sum(f for _, _, f in edges) / len(edges)
        prod = math.prod(f for _, _, f in edges)
    else:
        avg = prod = parent.backend.qubit_fidelity(qs[0]) if len(qs) == 1 else 0.0
    return VQPU(parent.name, parent.chip_id, qs, edges, avg, prod, strategy,
                [parent.backend.qubit_fidelity(p) for p in qs])


def build_vqpus(subs: Iterable[SubQPU], parent: QPU) -> list[VQPU]:
    """Abstract substructures into VQPUs: virtual ids follow ascending
    physical order; aggregates are copied from the substructure."""
    out = []
    for sub in subs:
        v = vqpu_from_qubits(parent, sub.qubits, sub.strategy)
        v.avg_fidelity, v.product_fidelity = sub.avg_fidelity, sub.product_fidelity
        out.append(v)
    return out


# --- database ----------------------------------------------------------------

@dataclass
class ChipRecord:
    qpu: QPU
    stdqpu: StdQPU
    vqpus: dict[int, list[VQPU]]
    seed: int = 0
    n_max: int = DEFAULT_N_MAX
    top_k: int = DEFAULT_TOP_K
    strategies: tuple[str, ...] = STRATEGIES

    def to_dict(self) -> dict[str, Any]:
        qpu = self.qpu.backend.to_dict()
        qpu["id"] = self.qpu.chip_id
        return {
            "version": DB_VERSION,
            "qpu": qpu,
            "stdqpu": self.stdqpu.to_dict(),
            "mining": {"seed": self.seed, "n_max": self.n_max, "top_k": self.top_k,
                       "strategies": list(self.strategies)},
            "vqpus": {str(n): [v.to_dict() for v in vs] for n, vs in sorted(self.vqpus.items())},
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ChipRecord":
        if doc.get("version") != DB_VERSION:
            raise DBError(f"record version {doc.get('version')} != {DB_VERSION}")
        qdoc = dict(doc["qpu"])
        chip_id = qdoc.pop("id")
        qpu = QPU(Backend.from_dict(qdoc), chip_id)
        mining = doc["mining"]
        vqpus = {int(n): [VQPU.from_dict(v, qpu) for v in vs] for n, vs in doc["vqpus"].items()}
        return cls(qpu, StdQPU.from_dict(doc["stdqpu"]), vqpus, mining["seed"], mining["n_max"],
                   mining["top_k"], tuple(mining["strategies"]))


def mine_chip(qpu: QPU, seed: int = 0, n_max: Optional[int] = None, top_k: int = DEFAULT_TOP_K,
              strategies: Iterable[str] = STRATEGIES) -> dict[int, list[VQPU]]:
    g = qpu.graph()
    if n_max is None:
        n_max = min(len(qpu.active_qubits()), DEFAULT_N_MAX)
    subs = find_substructures(g, n_max, strategies, seed, top_k, qpu.name, qpu.priority_qubits)
    return {n: build_vqpus(lst, qpu) for n, lst in subs.items()}


class ResourceDB:
    """In-memory chip records, optionally backed by a directory."""

    def __init__(self, path: Optional[os.PathLike] = None):
        self.path = Path(path) if path is not None else None
        self.chips: dict[str, ChipRecord] = {}

    # -- building
    def register_chip(self, name: str, chip_info: dict[str, Any], seed: int = 0,
                      n_max: Optional[int] = None, top_k: int = DEFAULT_TOP_K) -> ChipRecord:
        doc = dict(chip_info)
        doc.setdefault("name", name)
        if doc["name"] != name:
            raise ChipSchemaError(f"document name {doc['name']!r} does not match {name!r}")
        backend = validate_chip_doc(doc)
        existing = self.chips.get(name)
        chip_id = existing.qpu.chip_id if existing else self._next_id()
        qpu = QPU(backend, chip_id)
        active = len(qpu.active_qubits())
        n_max = min(active, DEFAULT_N_MAX) if n_max is None else min(n_max, active)
        record = ChipRecord(qpu, build_stdqpu(qpu), mine_chip(qpu, seed, n_max, top_k), seed, n_max, top_k)
        if self.path is not None:
            self.path.mkdir(parents=True, exist_ok=True)
            with FileLock(str(self.path / ".lock")):
                self.chips[name] = record
                _write_json(self.path / name / "record.json", record.to_dict())
                _write_json(self.path / "index.json", self._index())
        else:
            self.chips[name] = record
        return record

    def _next_id(self) -> int:
        return max((r.qpu.chip_id for r in self.chips.values()), default=-1) + 1

    def _index(self) -> dict[str, Any]:
        return {
            "version": DB_VERSION,
            "chips": {
                n: {"id": r.qpu.chip_id, "qubits_num": r.qpu.qubits_num, "status": r.qpu.status}
                for n, r in sorted(self.chips.items())
            },
        }

    # -- queries
    def chip(self, name: str) -> ChipRecord:
        if name not in self.chips:
            raise KeyError(f"unknown chip {name!r}")
        return self.chips[name]

    def vqpus(self, name: str, n: int) -> list[VQPU]:
        """VQPUs of exactly ``n`` qubits; sizes beyond the stored range are
        mined on demand (not persisted)."""
        rec = self.chip(name)
        if n in rec.vqpus:
            return rec.vqpus[n]
        if n > rec.n_max and n <= len(rec.qpu.active_qubits()):
            mined = mine_chip(rec.qpu, rec.seed, n, rec.top_k, rec.strategies)
            return mined.get(n, [])
        return []

    def online_chips(self) -> list[ChipRecord]:
        return [r for _, r in sorted(self.chips.items()) if r.qpu.status == "online"]

    def __eq__(self, other) -> bool:
        return (isinstance(other, ResourceDB)
                and {n: r.to_dict() for n, r in self.chips.items()}
                == {n: r.to_dict() for n, r in other.chips.items()})


def _dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _write_json(path: Path, doc: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(_dumps(doc))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: Path) -> Any:
    if not path.exists():
        raise DBError(f"missing file: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DBError(f"corrupt document {path}: {exc}") from None


def save_db(db: ResourceDB, path: os.PathLike) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with FileLock(str(path / ".lock")):
        for name, rec in sorted(db.chips.items()):
            _write_json(path / name / "record.json", rec.to_dict())
        _write_json(path / "index.json", db._index())


def load_db(path: os.PathLike) -> ResourceDB:
    path = Path(path)
    index = _read_json(path / "index.json")
    if not isinstance(index, dict) or index.get("version") != DB_VERSION:
        raise DBError(f"unsupported DB version in {path / 'index.json'}")
    db = ResourceDB(path)
    try:
        for name in sorted(index["chips"]):
            db.chips[name] = ChipRecord.from_dict(_read_json(path / name / "record.json"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DBError):
            raise
        raise DBError(f"corrupt document in {path}: {exc}") from None
    return db


def open_db(path: os.PathLike) -> ResourceDB:
    """Load the DB at ``path``, or start an empty one bound to it."""
    path = Path(path)
    if (path / "index.json").exists():
        return load_db(path)
    return ResourceDB(path)
