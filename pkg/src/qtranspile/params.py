"""Gate parameters: literal angles and linear symbolic expressions.

A parameter is either a plain ``float`` (radians) or a :class:`ParamExpr`,
an affine combination ``const + sum(coeff * name)`` of named variables.
Affine expressions are closed under addition, negation and scaling by
literals, which is all the merging and binding passes need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union


class UnboundParameterError(ValueError):
    """Raised when a numeric value is required but a symbol is unbound."""


@dataclass(frozen=True)
class ParamExpr:
    const: float = 0.0
    terms: tuple[tuple[str, float], ...] = ()

    @classmethod
    def symbol(cls, name: str) -> "ParamExpr":
        return cls(0.0, ((name, 1.0),))

    @classmethod
    def _build(cls, const: float, coeffs: Mapping[str, float]) -> "Param":
        terms = tuple(sorted((k, float(v)) for k, v in coeffs.items() if v != 0.0))
        if not terms:
            return float(const)
        return cls(float(const), terms)

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.terms)

    def _coeffs(self) -> dict[str, float]:
        return dict(self.terms)

    def __add__(self, other: "Param") -> "Param":
        coeffs = self._coeffs()
        if isinstance(other, ParamExpr):
            for name, c in other.terms:
                coeffs[name] = coeffs.get(name, 0.0) + c
            return ParamExpr._build(self.const + other.const, coeffs)
        return ParamExpr._build(self.const + float(other), coeffs)

    __radd__ = __add__

    def __neg__(self) -> "ParamExpr":
        return ParamExpr(-self.const, tuple((n, -c) for n, c in self.terms))

    def __sub__(self, other: "Param") -> "Param":
        return self + (-other)

    def __rsub__(self, other: "Param") -> "Param":
        return (-self) + other

    def __mul__(self, other: "Param") -> "Param":
        if isinstance(other, ParamExpr):
            raise TypeError("product of two symbolic parameters is not affine")
        k = float(other)
        return ParamExpr._build(self.const * k, {n: c * k for n, c in self.terms})

    __rmul__ = __mul__

    def __truediv__(self, other: "Param") -> "Param":
        if isinstance(other, ParamExpr):
            raise TypeError("division by a symbolic parameter is not affine")
        return self * (1.0 / float(other))

    def bind(self, bindings: Mapping[str, float]) -> "Param":
        const = self.const
        coeffs = {}
        for name, c in self.terms:
            if name in bindings:
                const += c * float(bindings[name])
            else:
                coeffs[name] = c
        return ParamExpr._build(const, coeffs)

    def __str__(self) -> str:
        parts = []
        for name, c in self.terms:
            if c == 1.0:
                body, neg = name, False
            elif c == -1.0:
                body, neg = name, True
            else:
                body, neg = f"{abs(c)!r}*{name}", c < 0
            parts.append((neg, body))
        if self.const != 0.0:
            parts.append((self.const < 0, repr(abs(self.const))))
        out = ""
        for i, (neg, body) in enumerate(parts):
            if i == 0:
                out = ("-" if neg else "") + body
            else:
                out += ("-" if neg else "+") + body
        return out


Param = Union[float, ParamExpr]


def is_symbolic(p: Param) -> bool:
    return isinstance(p, ParamExpr)


def bind_param(p: Param, bindings: Mapping[str, float]) -> Param:
    if isinstance(p, ParamExpr):
        return p.bind(bindings)
    return p


def to_float(p: Param) -> float:
    if isinstance(p, ParamExpr):
        raise UnboundParameterError(f"unbound parameter: {p}")
    return float(p)


def format_param(p: Param) -> str:
    if isinstance(p, ParamExpr):
        return str(p)
    return repr(float(p))


def wrap_angle(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    t = math.fmod(theta, 2 * math.pi)
    if t <= -math.pi:
        t += 2 * math.pi
    elif t > math.pi:
        t -= 2 * math.pi
    return t


def canonical_angle(p: Param) -> Param:
    if isinstance(p, ParamExpr):
        return p
    return wrap_angle(float(p))
