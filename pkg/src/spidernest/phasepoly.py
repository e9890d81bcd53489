"""Homogeneous circuits: commuting products of parity-phase gadgets.

A gadget's support is stored as an int bitmask (bit ``q`` set when qubit ``q``
is in the support), so machine-word sets come for free and wide circuits fall
back to Python's arbitrary precision ints.  Coefficients are in Z8, in units of
pi/4; zero coefficients and the empty support (a global phase) are never stored.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .circuit import Circuit, gadget_gates

ORACLE_LIMIT = 20


def support(qubits: Iterable[int]) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def members(mask: int) -> tuple[int, ...]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return tuple(out)


def _as_mask(s) -> int:
    if isinstance(s, (int, np.integer)):
        return int(s)
    return support(s)


class HomogeneousCircuit:
    """Map from support mask to a nonzero Z8 coefficient, over ``n`` qubits."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Mapping | Iterable[tuple] | None = None):
        self.n = n
        self.coeffs: dict[int, int] = {}
        if coeffs is not None:
            items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
            for s, k in items:
                self.add(s, k)

    def add(self, s, phase: int) -> None:
        """Fuse a gadget into the circuit in place."""
        mask = _as_mask(s)
        if mask <= 0:
            raise ValueError("gadget support must be nonempty")
        if mask >> self.n:
            raise ValueError(f"support {members(mask)} exceeds {self.n} qubits")
        k = (self.coeffs.get(mask, 0) + phase) % 8
        if k:
            self.coeffs[mask] = k
        else:
            self.coeffs.pop(mask, None)

    def __getitem__(self, s) -> int:
        return self.coeffs.get(_as_mask(s), 0)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.coeffs.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogeneousCircuit):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def copy(self) -> "HomogeneousCircuit":
        h = HomogeneousCircuit(self.n)
        h.coeffs = dict(self.coeffs)
        return h

    def t_count(self) -> int:
        return sum(k & 1 for k in self.coeffs.values())

    def dump(self) -> str:
        """One ``{q1,q2,...}: k`` line per gadget, sorted by member tuple."""
        rows = sorted((members(m), k) for m, k in self.coeffs.items())
        return "".join("{%s}: %d\n" % (",".join(map(str, qs)), k) for qs, k in rows)

    def __repr__(self):
        body = ", ".join(f"{set(members(m))}: {k}" for m, k in sorted(self.coeffs.items()))
        return f"HomogeneousCircuit(n={self.n}, {{{body}}})"


def add_gadget(h: HomogeneousCircuit, s, phase: int) -> HomogeneousCircuit:
    out = h.copy()
    out.add(s, phase)
    return out


def t_count(h: HomogeneousCircuit) -> int:
    return h.t_count()


def _bits_to_int(z) -> int:
    if isinstance(z, (int, np.integer)):
        return int(z)
    v = 0
    for i, b in enumerate(z):
        if b:
            v |= 1 << i
    return v


def phase_at(h: HomogeneousCircuit, z) -> int:
    """Phase (units of pi/4, mod 8) applied to basis state ``z``.

    ``z`` is a bit sequence indexed by qubit, or an int with bit ``q`` for qubit ``q``.
    """
    zi = _bits_to_int(z)
    return sum(k for m, k in h.coeffs.items() if bin(m & zi).count("1") & 1) % 8


def phase_table(h: HomogeneousCircuit, limit: int = ORACLE_LIMIT) -> np.ndarray:
    """Phases of all 2**n basis states, indexed by the int encoding of ``z``."""
    if h.n > limit:
        raise ValueError(f"{h.n} qubits exceeds the exhaustive oracle limit of {limit}")
    z = np.arange(1 << h.n, dtype=np.uint64)
    acc = np.zeros(z.shape, dtype=np.int64)
    for m, k in h.coeffs.items():
        acc += k * (np.bitwise_count(z & np.uint64(m)) & 1)
    return acc % 8


def is_identity(h: HomogeneousCircuit, limit: int = ORACLE_LIMIT) -> bool:
    return not phase_table(h, limit).any()


def _check_same(h1: HomogeneousCircuit, h2: HomogeneousCircuit) -> None:
    if h1.n != h2.n:
        raise ValueError(f"qubit counts differ: {h1.n} vs {h2.n}")


def compose(h1: HomogeneousCircuit, h2: HomogeneousCircuit) -> HomogeneousCircuit:
    _check_same(h1, h2)
    out = h1.copy()
    for m, k in h2.coeffs.items():
        out.add(m, k)
    return out


def inverse(h: HomogeneousCircuit) -> HomogeneousCircuit:
    out = HomogeneousCircuit(h.n)
    out.coeffs = {m: -k % 8 for m, k in h.coeffs.items()}
    return out


def synthesize(h: HomogeneousCircuit, n_total: int | None = None) -> Circuit:
    """CNOT + phase-gate circuit with the same diagonal action as ``h``."""
    gates = []
    for m in sorted(h.coeffs, key=lambda m: members(m)):
        gates += gadget_gates(members(m), h.coeffs[m])
    n = h.n if n_total is None else n_total
    return Circuit(n, n, tuple(gates))


def from_gadgets(n: int, gadgets: Iterable[tuple[Sequence[int] | int, int]]) -> HomogeneousCircuit:
    return HomogeneousCircuit(n, ((_as_mask(s), k) for s, k in gadgets))
