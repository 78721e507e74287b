"""Logical-to-physical qubit layouts and structure-aware initial placement."""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

import numpy as np

from ..graph import WeightedGraph


class LayoutError(ValueError):
    pass


class Layout:
    """Injective map from logical to physical qubits.

    Partial layouts are allowed while building; ``complete`` extends one to a
    full permutation of ``num_physical`` qubits, giving the extra logical ids
    (ancillas) the free physical qubits in ascending order.
    """

    def __init__(self, mapping: Optional[Mapping[int, int]] = None):
        self._l2p: dict[int, int] = {}
        self._p2l: dict[int, int] = {}
        for q, p in (mapping or {}).items():
            self.assign(int(q), int(p))

    @classmethod
    def trivial(cls, n: int) -> "Layout":
        return cls({q: q for q in range(n)})

    @classmethod
    def from_list(cls, physical: Iterable[int]) -> "Layout":
        return cls({q: p for q, p in enumerate(physical)})

    def assign(self, q: int, p: int) -> None:
        if q in self._l2p or p in self._p2l:
            raise LayoutError(f"layout not injective at logical {q} / physical {p}")
        self._l2p[q] = p
        self._p2l[p] = q

    def physical(self, q: int) -> int:
        return self._l2p[q]

    def logical(self, p: int) -> Optional[int]:
        return self._p2l.get(p)

    def swap_physical(self, a: int, b: int) -> None:
        qa, qb = self._p2l.pop(a, None), self._p2l.pop(b, None)
        if qa is not None:
            self._l2p[qa] = b
            self._p2l[b] = qa
        if qb is not None:
            self._l2p[qb] = a
            self._p2l[a] = qb

    def complete(self, num_physical: int) -> "Layout":
        out = self.copy()
        free = [p for p in range(num_physical) if p not in self._p2l]
        q = 0
        for p in free:
            while q in out._l2p:
                q += 1
            out.assign(q, p)
        return out

    def restrict(self, n: int) -> "Layout":
        """Only logical qubits 0..n-1."""
        return Layout({q: p for q, p in self._l2p.items() if q < n})

    def as_dict(self) -> dict[int, int]:
        return dict(sorted(self._l2p.items()))

    def to_list(self, n: Optional[int] = None) -> list[int]:
        n = len(self._l2p) if n is None else n
        return [self._l2p[q] for q in range(n)]

    def copy(self) -> "Layout":
        return Layout(self._l2p)

    def __len__(self) -> int:
        return len(self._l2p)

    def __eq__(self, other) -> bool:
        return isinstance(other, Layout) and self._l2p == other._l2p

    def __repr__(self) -> str:
        return f"Layout({self.as_dict()})"


def _ordered(g: WeightedGraph, strategy: str) -> list[int]:
    deg = g.degrees()
    if strategy == "degree":
        return sorted(g.nodes, key=lambda n: (-deg[n], n))
    if strategy == "weight":
        wsum = g.incident_weight()
        return sorted(g.nodes, key=lambda n: (-deg[n], -wsum[n], n))
    raise LayoutError(f"unknown layout strategy {strategy!r}")


def initial_layout(gqc: WeightedGraph, gvqpu: WeightedGraph, strategy: str = "degree",
                   seed: int = 0) -> Layout:
    """Pair circuit qubits with device qubits.

    ``degree``: both node lists sorted by degree (descending, ties by
    index) and paired position by position.  ``weight``: as ``degree`` but
    ties broken by the sum of incident edge weights (descending).
    ``random``: a seeded random choice of device qubits, assigned to the
    circuit qubits in index order.
    """
    if len(gqc) > len(gvqpu):
        raise LayoutError(f"circuit needs {len(gqc)} qubits, device has {len(gvqpu)}")
    if strategy == "random":
        rng = np.random.default_rng(seed)
        phys = [int(p) for p in rng.permutation(sorted(gvqpu.nodes))]
        return Layout({q: p for q, p in zip(sorted(gqc.nodes), phys)})
    logical = _ordered(gqc, strategy)
    physical = _ordered(gvqpu, strategy)
    return Layout({q: p for q, p in zip(logical, physical)})
