"""Pass / PassFlow / Model pipeline, preset optimization levels and
per-pass reports."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Optional

from .backend import Backend, Model
from .circuit import Circuit
from .dag import CircuitDAG, from_dag, to_dag
from .mapping.layout import Layout
from .mapping.routing import RoutingConfig, sabre_layout, sabre_route
from .passes import cancel_inverses, fuse_1q, gate_arity_counts, substitute_params, unroll_to_basis, unroll_to_two_qubit


class PassFlowError(ValueError):
    pass


class PassFailure(RuntimeError):
    def __init__(self, pass_name: str, cause: BaseException):
        super().__init__(f"pass '{pass_name}' failed: {cause}")
        self.pass_name = pass_name
        self.cause = cause


class BasePass:
    """A unit of work on the DAG.  The runner hands over the current model
    with ``set_model`` before ``run`` and reads it back with ``get_model``."""

    name = "base"

    def __init__(self, **params: Any):
        self.params = params
        self._model: Optional[Model] = None

    def set_model(self, model: Model) -> None:
        self._model = model

    def get_model(self) -> Model:
        return self._model

    @property
    def model(self) -> Model:
        if self._model is None:
            raise RuntimeError(f"pass '{self.name}' has no model")
        return self._model

    def run(self, dag: CircuitDAG) -> CircuitDAG:
        raise NotImplementedError


PASS_REGISTRY: dict[str, type[BasePass]] = {}


def register_pass(cls: type[BasePass]) -> type[BasePass]:
    PASS_REGISTRY[cls.name] = cls
    return cls


@register_pass
class UnrollTo2Q(BasePass):
    name = "unroll_to_2q"

    def run(self, dag):
        return unroll_to_two_qubit(dag)


@register_pass
class UnrollToBasis(BasePass):
    name = "unroll_to_basis"

    def run(self, dag):
        basis = self.params.get("basis") or self.model.backend.basis_gates
        return unroll_to_basis(dag, basis)


def _routing_config(params: dict) -> RoutingConfig:
    keys = RoutingConfig.__dataclass_fields__
    return RoutingConfig(**{k: v for k, v in params.items() if k in keys})


@register_pass
class SabreLayoutPass(BasePass):
    """Chooses ``model.initial_layout``; leaves the circuit unchanged.  A
    layout fixed beforehand (``model.scratch['layout_fixed']``) is kept."""

    name = "sabre_layout"

    def run(self, dag):
        m = self.model
        if m.scratch.get("layout_fixed") and m.initial_layout is not None:
            return dag
        p = self.params
        m.initial_layout = sabre_layout(
            dag, m,
            heuristic=p.get("heuristic", "H_D"),
            iterations=int(p.get("iterations", 0)),
            seed=int(p.get("seed", m.seed)),
            strategy=p.get("init", "degree"),
            config=_routing_config(p),
        )
        return dag


@register_pass
class SabreRoutePass(BasePass):
    name = "sabre_route"

    def run(self, dag):
        m = self.model
        p = self.params
        layout = m.initial_layout or Layout.trivial(dag.num_qubits)
        res = sabre_route(dag, m, p.get("heuristic", "H_D"), layout,
                          int(p.get("seed", m.seed)), _routing_config(p))
        m.initial_layout = res.initial_layout
        m.final_layout = res.final_layout
        m.scratch["swaps"] = m.scratch.get("swaps", 0) + res.swaps
        return res.dag


@register_pass
class CancelInverses(BasePass):
    name = "cancel_inverses"

    def run(self, dag):
        return cancel_inverses(dag)


@register_pass
class Fuse1Q(BasePass):
    name = "fuse_1q"

    def run(self, dag):
        return fuse_1q(dag)


@register_pass
class SubstituteParams(BasePass):
    name = "substitute_params"

    def run(self, dag):
        return substitute_params(dag, self.params.get("bindings", {}))


@dataclass
class PassSpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class PassFlow:
    passes: list[PassSpec] = field(default_factory=list)

    def validate(self) -> None:
        for spec in self.passes:
            if spec.name not in PASS_REGISTRY:
                raise PassFlowError(f"unknown pass '{spec.name}'")

    def build(self) -> list[BasePass]:
        self.validate()
        return [PASS_REGISTRY[s.name](**s.params) for s in self.passes]

    def names(self) -> list[str]:
        return [s.name for s in self.passes]

    def to_json(self) -> str:
        return json.dumps([{"name": s.name, "params": s.params} for s in self.passes], sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PassFlow":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PassFlowError(f"invalid passflow JSON: {exc}") from None
        if isinstance(doc, dict):
            doc = doc.get("passes", [])
        if not isinstance(doc, list):
            raise PassFlowError("passflow must be a list of passes")
        specs = []
        for item in doc:
            if isinstance(item, str):
                specs.append(PassSpec(item))
            elif isinstance(item, dict) and "name" in item:
                specs.append(PassSpec(item["name"], dict(item.get("params", {}))))
            else:
                raise PassFlowError(f"bad pass entry: {item!r}")
        flow = cls(specs)
        flow.validate()
        return flow


def preset_passflow(level: int) -> PassFlow:
    """Preset flows.

    0: unroll only.  1: + layout and routing with H_D from a random start.
    2: H_M routing from a degree-sorted start refined by one reverse pass,
    then inverse cancellation and single-qubit fusion.  3: as 2 with three
    refinement passes and a weight-sorted start.
    """
    if level not in (0, 1, 2, 3):
        raise PassFlowError(f"optimization level must be 0..3, got {level}")
    unroll = [PassSpec("unroll_to_2q")]
    basis = [PassSpec("unroll_to_basis")]
    if level == 0:
        return PassFlow(unroll + basis)
    if level == 1:
        return PassFlow(unroll + [
            PassSpec("sabre_layout", {"heuristic": "H_D", "init": "random", "iterations": 0}),
            PassSpec("sabre_route", {"heuristic": "H_D"}),
        ] + basis)
    iterations, init = (1, "degree") if level == 2 else (3, "weight")
    return PassFlow(unroll + [
        PassSpec("sabre_layout", {"heuristic": "H_M", "init": init, "iterations": iterations}),
        PassSpec("sabre_route", {"heuristic": "H_M"}),
    ] + basis + [PassSpec("cancel_inverses"), PassSpec("fuse_1q"), PassSpec("cancel_inverses")])


@dataclass
class PassEntry:
    name: str
    seconds: float
    pre_counts: dict[str, int]
    post_counts: dict[str, int]
    pre_depth: int
    post_depth: int


@dataclass
class PassReport:
    entries: list[PassEntry] = field(default_factory=list)
    initial_layout: Optional[dict[int, int]] = None
    final_layout: Optional[dict[int, int]] = None

    def to_dict(self) -> dict[str, Any]:
        def lay(d):
            return None if d is None else {str(k): v for k, v in sorted(d.items())}

        return {
            "passes": [asdict(e) for e in self.entries],
            "initial_layout": lay(self.initial_layout),
            "final_layout": lay(self.final_layout),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "PassReport":
        def lay(d):
            return None if d is None else {int(k): int(v) for k, v in d.items()}

        return cls([PassEntry(**e) for e in doc.get("passes", [])],
                   lay(doc.get("initial_layout")), lay(doc.get("final_layout")))


def _counts(dag: CircuitDAG) -> dict[str, int]:
    return gate_arity_counts(node.instr for node in dag.op_nodes())


_HEADER = f"{'pass':<18}{'time_ms':>10}{'1q':>8}{'2q':>8}{'depth':>8}"


def render_report(r: PassReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(r.to_dict(), sort_keys=True, indent=2)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [_HEADER]
    for e in r.entries:
        lines.append(
            f"{e.name:<18}{e.seconds * 1000:>10.2f}"
            f"{e.pre_counts['1q']:>4}>{e.post_counts['1q']:<3}"
            f"{e.pre_counts['2q']:>4}>{e.post_counts['2q']:<3}"
            f"{e.pre_depth:>4}>{e.post_depth:<3}"
        )
    if r.initial_layout is not None:
        lines.append("initial layout: " + " ".join(f"{q}->{p}" for q, p in sorted(r.initial_layout.items())))
    if r.final_layout is not None:
        lines.append("final layout:   " + " ".join(f"{q}->{p}" for q, p in sorted(r.final_layout.items())))
    return "\n".join(lines)


def _restricted(layout: Optional[Layout], n: int) -> Optional[dict[int, int]]:
    return None if layout is None else layout.restrict(n).as_dict()


def run_passflow(c: Circuit, pf: PassFlow, m: Model,
                 hook: Optional[Callable[[str, CircuitDAG], None]] = None) -> tuple[Circuit, Model, PassReport]:
    """Run each pass in order on the DAG of ``c``, threading ``m`` through."""
    passes = pf.build()
    dag = to_dag(c)
    n = c.num_qubits
    report = PassReport()
    for p in passes:
        pre_counts, pre_depth = _counts(dag), dag.depth()
        t0 = time.perf_counter()
        p.set_model(m)
        try:
            dag = p.run(dag)
        except Exception as exc:
            raise PassFailure(p.name, exc) from exc
        m = p.get_model()
        elapsed = time.perf_counter() - t0
        report.entries.append(PassEntry(p.name, elapsed, pre_counts, _counts(dag), pre_depth, dag.depth()))
        if hook is not None:
            hook(p.name, dag)
    report.initial_layout = _restricted(m.initial_layout, n)
    report.final_layout = _restricted(m.final_layout, n)
    return from_dag(dag), m, report


@dataclass
class TranspileResult:
    circuit: Circuit
    model: Model
    report: PassReport
    initial_layout: dict[int, int]
    final_layout: dict[int, int]


NAIVE_EMBED = PassFlow([PassSpec("sabre_route", {"heuristic": "H_D"}), PassSpec("unroll_to_basis")])


def transpile(c: Circuit, backend: Backend, level: int = 2, passflow: Optional[PassFlow] = None,
              seed: int = 0, initial_layout: Optional[Layout] = None) -> TranspileResult:
    """Compile ``c`` for ``backend`` with a preset level or a custom flow.

    A flow that never routes (level 0, or a custom flow without
    ``sabre_route``) is followed by a naive embedding: the current layout
    (trivial if none) routed with H_D and unrolled again, so the result
    always respects the coupling graph and basis.
    """
    flow = passflow if passflow is not None else preset_passflow(level)
    m = Model(backend, seed=seed)
    if initial_layout is not None:
        m.initial_layout = initial_layout
        m.scratch["layout_fixed"] = True
    out, m, report = run_passflow(c, flow, m)
    if m.final_layout is None:
        out, m, extra = run_passflow(out, NAIVE_EMBED, m)
        for e in extra.entries:
            e.name = "embed:" + e.name
        report.entries.extend(extra.entries)
        report.initial_layout, report.final_layout = extra.initial_layout, extra.final_layout
    n = c.num_qubits
    return TranspileResult(out, m, report, _restricted(m.initial_layout, n), _restricted(m.final_layout, n))
