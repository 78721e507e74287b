"""Quantum circuit compilation toolkit: OpenQASM standardization, chip
virtualization, VQPU selection and noise-aware transpilation."""

from .api import CompileError, CompileResult, CompileTask, call_compiler_api, update_chip_api
from .backend import Backend, Model
from .circuit import Circuit, Instruction, gate_matrix
from .dag import CircuitDAG, from_dag, to_dag
from .graph import WeightedGraph, circuit_weighted_graph
from .mapping import (
    Layout, distance_matrix, fidelity_matrix, heuristic_score, initial_layout, sabre_layout, sabre_route,
)
from .metrics import VerificationResult, circuit_cost, depth, hellinger_fidelity, verify_program
from .params import ParamExpr
from .passes import cancel_inverses, fuse_1q, substitute_params, unroll_to_basis, unroll_to_two_qubit
from .qasm import QasmError, emit_qasm, parse_qasm
from .resources import ResourceDB, find_substructures, load_db, open_db, save_db
from .selector import SelectionRequest, graph_isomorphic, select_fidelity_first, select_structure_first, wl_kernel
from .simulator import equivalent_up_to_layout, simulate_statevector
from .standardize import standardize
from .synthesis import decompose_one_qubit_zyz, decompose_two_qubit_kak
from .transpiler import PassFlow, PassSpec, preset_passflow, render_report, run_passflow, transpile

__version__ = "0.1.0"
