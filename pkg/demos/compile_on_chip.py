"""Register a 122-qubit lattice chip and compile a six-qubit ladder circuit.

Run: python3 demos/compile_on_chip.py
"""

import tempfile

from qtranspile import call_compiler_api
from qtranspile.api import update_chip_api
from qtranspile.chips import baihua_like_chip, ladder_demo_circuit
from qtranspile.qasm import emit_qasm
from qtranspile.transpiler import PassReport, render_report


def main():
    with tempfile.TemporaryDirectory() as tmp:
        db = update_chip_api("baihua_like", baihua_like_chip(), tmp)
        rec = db.chip("baihua_like")
        print(f"chip: {len(rec.qpu.active_qubits())} coupled qubits on a "
              f"{rec.stdqpu.rows}x{rec.stdqpu.cols} lattice")

        qasm = emit_qasm(ladder_demo_circuit())
        for prefer in ("fidelity", "structure"):
            res = call_compiler_api(db, circuit=qasm, vqpu_preferred=prefer, optimization_level=2)
            v = res.info["vqpu"]
            print(f"\n{prefer}-first: qubits {v['qubits']} product fidelity {v['product_fidelity']:.4f}")
            print(f"  exact structure match: {res.info['exact_structure_match']}, swaps: {res.info['swaps']}")
            print(f"  verified: {res.ok}, metrics: {res.info['metrics']}")

        print("\nper-pass report (structure-first):")
        print(render_report(PassReport.from_dict(res.info["report"]), "text"))


if __name__ == "__main__":
    main()
