"""OpenQASM 2.0 reader and canonical writer.

Only the built-in gate vocabulary (see ``circuit.GATES``) is understood;
``include "qelib1.inc";`` is accepted and ignored.  Gate definitions,
``opaque``, ``reset`` and classical control are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Optional

from .circuit import GATES, Circuit, Instruction
from .params import Param, ParamExpr, UnboundParameterError, format_param


class QasmError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line, self.col = line, col
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<op>==|[;,\[\]\(\)\{\}+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.cregs: dict[str, tuple[int, int]] = {}
        self.circuit = Circuit()

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None) -> QasmError:
        tok = tok or self.tok
        return QasmError(msg, tok.line, tok.col)

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> _Tok:
        if self.tok.kind != kind:
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    # grammar
    def parse(self) -> Circuit:
        if self.tok.text == "OPENQASM":
            self.advance()
            ver = self.advance()
            if ver.text not in ("2.0", "2"):
                raise self.error(f"unsupported OpenQASM version {ver.text}", ver)
            self.expect(";")
        while self.tok.kind != "eof":
            self.statement()
        return self.circuit

    def statement(self) -> None:
        tok = self.tok
        word = tok.text
        if word == "include":
            self.advance()
            self.expect_kind("string", "file name")
            self.expect(";")
        elif word in ("qreg", "creg"):
            self.register(word)
        elif word == "barrier":
            self.advance()
            qubits = []
            for group in self.arglist(self.qregs):
                for q in group:
                    if q not in qubits:
                        qubits.append(q)
            self.expect(";")
            self.circuit.instructions.append(Instruction.barrier(qubits))
        elif word == "measure":
            self.advance()
            src = self.argument(self.qregs)
            self.expect("->")
            dst = self.argument(self.cregs)
            self.expect(";")
            if len(src) != len(dst):
                raise self.error("measure register sizes differ", tok)
            for q, c in zip(src, dst):
                self.circuit.instructions.append(Instruction.measure(q, c))
        elif word in ("gate", "opaque", "if", "reset"):
            raise self.error(f"unsupported statement '{word}'")
        elif tok.kind == "id":
            self.gate_call()
        else:
            raise self.error(f"unexpected token {word!r}")

    def register(self, kind: str) -> None:
        self.advance()
        name_tok = self.expect_kind("id", "register name")
        self.expect("[")
        size = int(self.expect_kind("int", "register size").text)
        self.expect("]")
        self.expect(";")
        name = name_tok.text
        if name in self.qregs or name in self.cregs:
            raise self.error(f"register '{name}' redeclared", name_tok)
        if size <= 0:
            raise self.error("register size must be positive", name_tok)
        if kind == "qreg":
            self.qregs[name] = (self.circuit.num_qubits, size)
            self.circuit.qregs.append((name, size))
        else:
            self.cregs[name] = (self.circuit.num_clbits, size)
            self.circuit.cregs.append((name, size))

    def argument(self, regs: dict[str, tuple[int, int]]) -> list[int]:
        name_tok = self.expect_kind("id", "register reference")
        if name_tok.text not in regs:
            raise self.error(f"undeclared register '{name_tok.text}'", name_tok)
        offset, size = regs[name_tok.text]
        if self.tok.text == "[":
            self.advance()
            idx_tok = self.expect_kind("int", "index")
            self.expect("]")
            idx = int(idx_tok.text)
            if idx >= size:
                raise self.error(
                    f"index {idx} out of range for register '{name_tok.text}' of size {size}",
                    idx_tok,
                )
            return [offset + idx]
        return list(range(offset, offset + size))

    def arglist(self, regs) -> list[list[int]]:
        args = [self.argument(regs)]
        while self.tok.text == ",":
            self.advance()
            args.append(self.argument(regs))
        return args

    def gate_call(self) -> None:
        name_tok = self.advance()
        name = name_tok.text
        gdef = GATES.get(name)
        if gdef is None:
            raise self.error(f"unknown gate '{name}'", name_tok)
        params: list[Param] = []
        if self.tok.text == "(":
            self.advance()
            if self.tok.text != ")":
                params.append(self.expr())
                while self.tok.text == ",":
                    self.advance()
                    params.append(self.expr())
            self.expect(")")
        args = self.arglist(self.qregs)
        self.expect(";")
        if len(params) != gdef.num_params:
            raise self.error(f"gate '{name}' takes {gdef.num_params} parameter(s)", name_tok)
        if len(args) != gdef.num_qubits:
            raise self.error(f"gate '{name}' takes {gdef.num_qubits} qubit(s)", name_tok)
        # whole-register arguments broadcast
        width = max(len(a) for a in args)
        if any(len(a) not in (1, width) for a in args):
            raise self.error("register sizes differ in broadcast", name_tok)
        for k in range(width):
            qubits = tuple(a[k] if len(a) > 1 else a[0] for a in args)
            if len(set(qubits)) != len(qubits):
                raise self.error(f"repeated qubit in '{name}'", name_tok)
            self.circuit.instructions.append(Instruction.gate(name, qubits, params))

    # parameter expressions: + - * / ^ with the usual precedence
    def expr(self) -> Param:
        value = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Param:
        value = self.unary()
        while self.tok.text in ("*", "/"):
            op_tok = self.advance()
            rhs = self.unary()
            try:
                value = value * rhs if op_tok.text == "*" else value / rhs
            except (TypeError, ZeroDivisionError) as exc:
                raise self.error(str(exc), op_tok) from None
        return value

    def unary(self) -> Param:
        if self.tok.text == "-":
            self.advance()
            return -self.unary()
        if self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Param:
        base = self.atom()
        if self.tok.text == "^":
            op_tok = self.advance()
            exponent = self.unary()
            if isinstance(base, ParamExpr) or isinstance(exponent, ParamExpr):
                raise self.error("power of a symbolic parameter is not supported", op_tok)
            return float(base) ** float(exponent)
        return base

    def atom(self) -> Param:
        tok = self.advance()
        if tok.kind in ("real", "int"):
            return float(tok.text)
        if tok.text == "(":
            value = self.expr()
            self.expect(")")
            return value
        if tok.kind == "id":
            if tok.text == "pi":
                return math.pi
            if tok.text in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                if isinstance(arg, ParamExpr):
                    raise self.error(f"{tok.text}() of a symbolic parameter is not supported", tok)
                return _FUNCS[tok.text](arg)
            return ParamExpr.symbol(tok.text)
        raise self.error(f"unexpected token {tok.text or 'end of input'!r} in expression", tok)


def parse_qasm(text: str) -> Circuit:
    """Parse OpenQASM 2.0 source into a :class:`Circuit`.

    Raises :class:`QasmError` carrying the line and column of the problem.
    """
    return _Parser(text).parse()


def _operand(regs: list[tuple[str, int]], index: int) -> str:
    for name, size in regs:
        if index < size:
            return f"{name}[{index}]"
        index -= size
    raise ValueError("operand out of range")


def _lines(circuit: Circuit, allow_symbolic: bool) -> Iterator[str]:
    yield "OPENQASM 2.0;"
    yield 'include "qelib1.inc";'
    for name, size in circuit.qregs:
        yield f"qreg {name}[{size}];"
    for name, size in circuit.cregs:
        yield f"creg {name}[{size}];"
    for instr in circuit.instructions:
        qargs = ",".join(_operand(circuit.qregs, q) for q in instr.qubits)
        if instr.kind == "measure":
            yield f"measure {qargs} -> {_operand(circuit.cregs, instr.clbits[0])};"
        elif instr.kind == "barrier":
            yield f"barrier {qargs};"
        else:
            if instr.params:
                if not allow_symbolic and instr.is_symbolic:
                    raise UnboundParameterError(f"unbound parameter in {instr.name} gate")
                ps = ",".join(format_param(p) for p in instr.params)
                yield f"{instr.name}({ps}) {qargs};"
            else:
                yield f"{instr.name} {qargs};"


def emit_qasm(circuit: Circuit, allow_symbolic: bool = False) -> str:
    """Write ``circuit`` as canonical OpenQASM 2.0 text, one statement per line."""
    return "\n".join(_lines(circuit, allow_symbolic)) + "\n"
