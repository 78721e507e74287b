"""Benchmark harness: compile a suite of QASM files under several
selection/heuristic/initial-layout strategies and report medians.

A strategy name is ``x_y_z`` with x in {fid, struc} (VQPU selection),
y in {H_D, H_Fi, H_M} (routing heuristic) and z in {rand, degree, weight}
(initial layout).
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

from .api import _circuit_graph
from .metrics import circuit_cost, depth
from .passes import gate_arity_counts
from .qasm import parse_qasm
from .resources import ResourceDB
from .selector import SelectionRequest, select_fidelity_first, select_structure_first
from .standardize import standardize
from .transpiler import PassFlow, PassSpec, transpile
from .mapping.layout import Layout

SELECTIONS = {"fid": "fidelity", "struc": "structure"}
INITS = {"rand": "random", "degree": "degree", "weight": "weight"}
HEURISTIC_NAMES = ("H_D", "H_Fi", "H_M")
FIELDS = ("circuit", "strategy", "qubits", "runs", "depth", "gates_2q", "time_s", "cost")


class BenchError(ValueError):
    pass


@dataclass
class Strategy:
    selection: str
    heuristic: str
    init: str

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        parts = name.strip().split("_")
        # the heuristic itself contains an underscore: x_H_y_z
        if len(parts) != 4 or parts[1] != "H":
            raise BenchError(f"strategy {name!r} is not of the form x_y_z")
        x, y, z = parts[0], "H_" + parts[2], parts[3]
        if x not in SELECTIONS or y not in HEURISTIC_NAMES or z not in INITS:
            raise BenchError(f"unknown strategy {name!r}")
        return cls(SELECTIONS[x], y, INITS[z])

    def passflow(self, iterations: int = 1) -> PassFlow:
        return PassFlow([
            PassSpec("unroll_to_2q"),
            PassSpec("sabre_layout", {"heuristic": self.heuristic, "init": self.init, "iterations": iterations}),
            PassSpec("sabre_route", {"heuristic": self.heuristic}),
            PassSpec("unroll_to_basis"),
            PassSpec("cancel_inverses"),
            PassSpec("fuse_1q"),
            PassSpec("cancel_inverses"),
        ])


@dataclass
class BenchRow:
    circuit: str
    strategy: str
    qubits: int
    runs: int
    depth: float
    gates_2q: float
    time_s: float
    cost: float


def load_suite(suite: Path) -> list[tuple[str, str]]:
    suite = Path(suite)
    if not suite.is_dir():
        raise BenchError(f"suite directory {suite} not readable")
    return [(p.stem, p.read_text()) for p in sorted(suite.glob("*.qasm"))]


def run_bench(circuits: Iterable[tuple[str, str]], db: ResourceDB, strategies: Iterable[str],
              seeds: int = 5, chip: Optional[str] = None) -> list[BenchRow]:
    """One row per (circuit, strategy) with medians over ``seeds`` runs.
    Wall time covers selection plus transpilation."""
    parsed = [Strategy.parse(s) for s in strategies]
    names = [s.strip() for s in strategies]
    rows = []
    for cname, text in circuits:
        std = standardize(parse_qasm(text))
        n = std.num_qubits
        for sname, strat in zip(names, parsed):
            depths, twos, times, costs = [], [], [], []
            for seed in range(seeds):
                t0 = time.perf_counter()
                req = SelectionRequest(n, _circuit_graph(std), strat.selection, chip)
                witness = None
                if strat.selection == "structure":
                    vqpu, witness = select_structure_first(db, req)
                else:
                    vqpu = select_fidelity_first(db, req)
                rec = db.chip(vqpu.parent_name)
                backend = vqpu.backend(rec.qpu.backend.basis_gates)
                tr = transpile(std, backend, passflow=strat.passflow(), seed=seed,
                               initial_layout=Layout(witness) if witness else None)
                times.append(time.perf_counter() - t0)
                depths.append(depth(tr.circuit))
                twos.append(gate_arity_counts(tr.circuit.instructions)["2q"])
                costs.append(circuit_cost(tr.circuit, backend))
            rows.append(BenchRow(cname, sname, n, seeds, statistics.median(depths), statistics.median(twos),
                                 statistics.median(times), statistics.median(costs)))
    return rows


def write_report(rows: list[BenchRow], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".csv":
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=FIELDS)
            writer.writeheader()
            for r in rows:
                writer.writerow(asdict(r))
    else:
        path.write_text(json.dumps({"rows": [asdict(r) for r in rows]}, indent=2, sort_keys=True))


def _typed(d: dict[str, Any]) -> BenchRow:
    return BenchRow(str(d["circuit"]), str(d["strategy"]), int(d["qubits"]), int(d["runs"]),
                    float(d["depth"]), float(d["gates_2q"]), float(d["time_s"]), float(d["cost"]))


def read_report(path: Path) -> list[BenchRow]:
    path = Path(path)
    if path.suffix == ".csv":
        with path.open(newline="") as fh:
            return [_typed(d) for d in csv.DictReader(fh)]
    return [_typed(d) for d in json.loads(path.read_text())["rows"]]
