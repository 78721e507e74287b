import json
import statistics

import pytest

from qtranspile.backend import Backend, Model
from qtranspile.chips import ladder_demo_circuit, lattice_chip, random_connected_backend
from qtranspile.circuit import Circuit
from qtranspile.metrics import circuit_cost, verify_program
from qtranspile.random_circuit import random_circuit
from qtranspile.resources import validate_chip_doc
from qtranspile.simulator import equivalent_up_to_layout
from qtranspile.transpiler import (
    PASS_REGISTRY, BasePass, PassFailure, PassFlow, PassFlowError, PassReport, PassSpec, preset_passflow,
    register_pass, render_report, run_passflow, transpile,
)


@register_pass
class ProbeWrite(BasePass):
    name = "probe_write"

    def run(self, dag):
        self.model.scratch["probe"] = self.params.get("value", 1)
        return dag


@register_pass
class ProbeRead(BasePass):
    name = "probe_read"

    def run(self, dag):
        self.model.scratch["seen"] = self.model.scratch.get("probe")
        return dag


@register_pass
class Explode(BasePass):
    name = "explode"

    def run(self, dag):
        raise ValueError("boom")


def ladder_backend():
    # 2x3 ladder: 0-1-2 / 3-4-5 with rungs
    edges = [(0, 1, 0.99), (1, 2, 0.98), (3, 4, 0.97), (4, 5, 0.99), (0, 3, 0.96), (1, 4, 0.995), (2, 5, 0.97)]
    return Backend("ladder6", 6, edges, ["cx", "rx", "ry", "rz"])


def test_empty_passflow():
    c = random_circuit(3, 10, seed=0)
    out, m, report = run_passflow(c, PassFlow([]), Model(ladder_backend()))
    assert out.instructions == c.instructions
    assert report.entries == []
    assert render_report(report).splitlines() == [render_report(PassReport()).splitlines()[0]]


def test_model_mutation_visible_to_next_pass():
    flow = PassFlow([PassSpec("probe_write", {"value": 42}), PassSpec("probe_read")])
    _, m, report = run_passflow(Circuit.empty(1), flow, Model(ladder_backend()))
    assert m.scratch["seen"] == 42
    assert [e.name for e in report.entries] == ["probe_write", "probe_read"]


def test_failing_pass_named():
    flow = PassFlow([PassSpec("unroll_to_2q"), PassSpec("explode")])
    with pytest.raises(PassFailure, match="pass 'explode' failed: boom") as err:
        run_passflow(Circuit.empty(1), flow, Model(ladder_backend()))
    assert err.value.pass_name == "explode"


def test_unknown_pass_rejected():
    with pytest.raises(PassFlowError):
        PassFlow.from_json('["unroll_to_2q", "nope"]')
    with pytest.raises(PassFlowError):
        PassFlow.from_json("{not json")


def test_public_pass_vocabulary():
    for name in ("unroll_to_2q", "unroll_to_basis", "sabre_layout", "sabre_route", "cancel_inverses", "fuse_1q",
                 "substitute_params"):
        assert name in PASS_REGISTRY


def test_presets():
    assert "sabre_route" not in preset_passflow(0).names()
    assert "sabre_layout" not in preset_passflow(0).names()
    l1 = preset_passflow(1).passes
    assert [s.params for s in l1 if s.name == "sabre_route"] == [{"heuristic": "H_D"}]
    assert [s.params["init"] for s in l1 if s.name == "sabre_layout"] == ["random"]
    l2 = preset_passflow(2)
    assert {"heuristic": "H_M"} in [s.params for s in l2.passes if s.name == "sabre_route"]
    assert {"cancel_inverses", "fuse_1q"} <= set(l2.names())
    l3 = [s.params for s in preset_passflow(3).passes if s.name == "sabre_layout"][0]
    assert l3["iterations"] == 3 and l3["init"] == "weight"
    with pytest.raises(PassFlowError):
        preset_passflow(4)


def test_passflow_json_round_trip():
    for level in range(4):
        pf = preset_passflow(level)
        assert PassFlow.from_json(pf.to_json()) == pf


def test_level2_on_figure_circuit():
    c = ladder_demo_circuit()
    b = ladder_backend()
    res = transpile(c, b, level=2)
    assert verify_program(res.circuit, b).ok
    assert {g.name for g in res.circuit.gates()} <= set(b.basis_gates)
    assert equivalent_up_to_layout(c, res.circuit, res.initial_layout, res.final_layout)
    assert [e.name for e in res.report.entries] == preset_passflow(2).names()
    text = render_report(res.report)
    assert len(text.splitlines()) == 1 + len(res.report.entries) + 2


def test_report_json_round_trip():
    res = transpile(ladder_demo_circuit(), ladder_backend(), level=3)
    doc = json.loads(render_report(res.report, "json"))
    assert PassReport.from_dict(doc) == res.report
    assert render_report(res.report, "json") == render_report(PassReport.from_dict(doc), "json")


def test_level0_gets_embedded():
    b = random_connected_backend(8, seed=2)
    c = random_circuit(5, 20, seed=3)
    res = transpile(c, b, level=0)
    names = [e.name for e in res.report.entries]
    assert names[:2] == ["unroll_to_2q", "unroll_to_basis"] and names[2].startswith("embed:")
    assert verify_program(res.circuit, b).ok


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_presets_never_increase_qubit_count(level):
    for seed in range(5):
        b = random_connected_backend(8, seed=seed)
        res = transpile(random_circuit(5, 20, seed=seed), b, level=level, seed=seed)
        assert res.circuit.num_qubits <= b.qubits_num


def test_level2_beats_level0_on_heterogeneous_chip():
    b = validate_chip_doc(lattice_chip(4, 4, seed=7, fid_range=(0.85, 0.999)))
    l0, l2 = [], []
    for seed in range(50):
        c = random_circuit(6, 30, seed=seed)
        l0.append(circuit_cost(transpile(c, b, level=0, seed=seed).circuit, b))
        l2.append(circuit_cost(transpile(c, b, level=2, seed=seed).circuit, b))
    assert statistics.mean(l2) <= statistics.mean(l0)
