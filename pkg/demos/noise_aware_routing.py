"""Compare distance-only and noise-aware routing on a 6x6 lattice with
uneven coupler fidelities.

Run: python3 demos/noise_aware_routing.py
"""

import statistics

from qtranspile import transpile
from qtranspile.bench import Strategy
from qtranspile.chips import lattice_chip
from qtranspile.metrics import circuit_cost
from qtranspile.random_circuit import random_circuit
from qtranspile.resources import validate_chip_doc

N_CIRCUITS = 50


def main():
    backend = validate_chip_doc(lattice_chip(6, 6, seed=0, fid_range=(0.90, 0.999)))
    circuits = [random_circuit(10, 60, seed=1000 + i) for i in range(N_CIRCUITS)]
    for heuristic in ("H_D", "H_Fi", "H_M"):
        flow = Strategy("fidelity", heuristic, "degree").passflow()
        costs, swaps = [], []
        for i, c in enumerate(circuits):
            r = transpile(c, backend, passflow=flow, seed=i)
            costs.append(circuit_cost(r.circuit, backend, K=0.995, f1q=0.996))
            swaps.append(r.model.scratch.get("swaps", 0))
        print(f"{heuristic:5s} median cost {statistics.median(costs):.3f}  median swaps {statistics.median(swaps)}")


if __name__ == "__main__":
    main()
