"""Command line: ``update-chip``, ``compile`` and ``bench``.

Exit codes: 0 ok, 1 user error, 2 verification failure, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
import traceback
from pathlib import Path
from typing import Optional, Sequence

from .api import CompileError, call_compiler_api, update_chip_api
from .bench import BenchError, load_suite, read_report, run_bench, write_report
from .qasm import QasmError
from .resources import ChipSchemaError, DBError, ResourceDB, open_db
from .transpiler import PassFlowError, render_report, PassReport

EXIT_OK, EXIT_USER, EXIT_VERIFY, EXIT_INTERNAL = 0, 1, 2, 3

USER_ERRORS = (CompileError, ChipSchemaError, DBError, QasmError, PassFlowError, BenchError,
               FileNotFoundError, KeyError, json.JSONDecodeError)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc}") from None


def cmd_update_chip(args) -> int:
    doc = _read_json(args.file)
    db = update_chip_api(args.name, doc, args.db, seed=args.seed)
    rec = db.chip(args.name)
    print(f"chip {args.name}: {rec.qpu.qubits_num} qubits, lattice {rec.stdqpu.rows}x{rec.stdqpu.cols}"
          + (" (degenerate)" if rec.stdqpu.degenerate else ""))
    for n, vs in sorted(rec.vqpus.items()):
        print(f"  n={n:<3d} vqpus={len(vs)}")
    return EXIT_OK


def cmd_compile(args) -> int:
    try:
        qasm = Path(args.qasm).read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {args.qasm}: {exc}") from None
    passflow = Path(args.passflow).read_text() if args.passflow else None
    qubits = [int(x) for x in args.qubits.split(",")] if args.qubits else None
    result = call_compiler_api(
        args.db, circuit=qasm, transpile=not args.no_transpile, qpu_name=args.qpu, qubits_list=qubits,
        optimization_level=args.level, passflow=passflow, vqpu_preferred=args.prefer, seed=args.seed,
    )
    doc = result.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True))
    if args.report == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(result.compiled_qasm, end="")
        report = result.info.get("report")
        if report is not None:
            print(render_report(PassReport.from_dict(report), "text"))
        metrics = result.info.get("metrics")
        if metrics:
            print("metrics: " + " ".join(f"{k}={v}" for k, v in metrics.items()))
    if not result.ok:
        for check, msg in result.verification.violations:
            print(f"verification failed [{check}]: {msg}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_bench(args) -> int:
    circuits = load_suite(Path(args.suite))
    doc = _read_json(args.chip)
    strategies = [s for s in args.strategies.split(",") if s]
    with tempfile.TemporaryDirectory() as tmp:
        db = open_db(args.db) if args.db else ResourceDB(Path(tmp))
        if doc["name"] not in db.chips:
            db.register_chip(doc["name"], doc)
        rows = run_bench(circuits, db, strategies, args.seeds, doc["name"])
    write_report(rows, Path(args.out))
    assert len(read_report(Path(args.out))) == len(rows)
    print(f"{len(rows)} rows written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtranspile", description="Quantum circuit compilation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    u = sub.add_parser("update-chip", help="register a chip and build its VQPU library")
    u.add_argument("--name", required=True)
    u.add_argument("--file", required=True)
    u.add_argument("--db", required=True)
    u.add_argument("--seed", type=int, default=0)
    u.set_defaults(func=cmd_update_chip)

    c = sub.add_parser("compile", help="compile a QASM file against the chip database")
    c.add_argument("--qasm", required=True)
    c.add_argument("--db", required=True)
    c.add_argument("--qpu")
    c.add_argument("--qubits", help="comma-separated physical qubits to pin")
    c.add_argument("--level", type=int, default=2, choices=[0, 1, 2, 3])
    c.add_argument("--passflow", help="JSON passflow file")
    c.add_argument("--prefer", default="fidelity", choices=["fidelity", "structure"])
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--report", default="text", choices=["text", "json"])
    c.add_argument("--out", help="also write the JSON result here")
    c.add_argument("--no-transpile", action="store_true", help="verify only")
    c.set_defaults(func=cmd_compile)

    b = sub.add_parser("bench", help="benchmark strategies on a suite of QASM files")
    b.add_argument("--suite", required=True)
    b.add_argument("--chip", required=True)
    b.add_argument("--strategies", required=True, help="comma-separated x_y_z names")
    b.add_argument("--seeds", type=int, default=5)
    b.add_argument("--out", required=True, help=".csv or .json")
    b.add_argument("--db", help="existing database (default: temporary)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USER
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
