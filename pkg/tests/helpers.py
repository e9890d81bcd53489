"""Test oracles that share no code with the package's simulator.

Matrices here use little-endian indexing (bit q of a basis index is qubit q)
and build every gate from its textbook matrix or basis-state action.
"""
import random

import numpy as np

from spidernest import circuit as C
from spidernest.circuit import Circuit, Gate

W = np.exp(1j * np.pi / 4)
HMAT = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def _apply_1q(m, n, q, u):
    rest = m.shape[1]
    t = m.reshape(2 ** (n - q - 1), 2, 2 ** q, rest)
    t = np.einsum("ab,xbyr->xayr", u, t)
    return t.reshape(2 ** n, rest)


def _perm(m, n, f):
    out = np.empty_like(m)
    for x in range(2 ** n):
        out[f(x)] = m[x]
    return out


def _bit(x, q):
    return x >> q & 1


def unitary(c: Circuit) -> np.ndarray:
    n = c.n_total
    m = np.eye(2 ** n, dtype=complex)
    idx = np.arange(2 ** n)
    for g in c.gates:
        k, qs = g.kind, g.qubits
        if k == C.H:
            m = _apply_1q(m, n, qs[0], HMAT)
        elif k in (C.X, C.CNOT, C.CCNOT, C.MCT):
            ctrl, t = qs[:-1], qs[-1]
            m = _perm(m, n, lambda x: x ^ (1 << t) if all(_bit(x, q) for q in ctrl) else x)
        elif k == C.SWAP:
            a, b = qs
            m = _perm(m, n, lambda x: x ^ ((1 << a) | (1 << b)) if _bit(x, a) != _bit(x, b) else x)
        elif k in C.PHASE_OF:
            m = m * np.where((idx >> qs[0]) & 1, W ** C.PHASE_OF[k], 1)[:, None]
        elif k in (C.CZ, C.CCZ):
            on = np.ones(2 ** n, dtype=bool)
            for q in qs:
                on &= ((idx >> q) & 1).astype(bool)
            m = m * np.where(on, -1, 1)[:, None]
        elif k == C.PHASE:
            par = np.zeros(2 ** n, dtype=int)
            for q in qs:
                par ^= (idx >> q) & 1
            m = m * (W ** (g.phase * par))[:, None]
        else:
            raise ValueError(f"oracle cannot handle {g!r}")
    return m


def same_up_to_phase(a, b, tol=1e-9):
    i = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(b[i]) < 1e-12:
        return False
    ph = b[i] / a[i]
    if abs(abs(ph) - 1) > tol:
        return False
    return np.allclose(a * ph, b, atol=tol)


def diagonal_phases(h):
    """exp(i pi/4 * phase) for each basis state, straight from the gadget definition."""
    out = []
    for z in range(2 ** h.n):
        acc = 0
        for m, k in h.coeffs.items():
            acc += k * (bin(z & m).count("1") % 2)
        out.append(W ** (acc % 8))
    return np.array(out)


GATE_SET = [C.X, C.Z, C.S, C.SDG, C.T, C.TDG, C.H, C.CNOT, C.CZ, C.SWAP, C.CCZ, C.CCNOT]
_ARITY = {C.CNOT: 2, C.CZ: 2, C.SWAP: 2, C.CCZ: 3, C.CCNOT: 3}


def random_circuit(rng: random.Random, n: int, m: int, kinds=GATE_SET) -> Circuit:
    gates = []
    while len(gates) < m:
        k = rng.choice(kinds)
        ar = _ARITY.get(k, 1)
        if ar > n:
            if all(_ARITY.get(x, 1) > n for x in kinds):
                break
            continue
        gates.append(Gate(k, tuple(rng.sample(range(n), ar))))
    return Circuit(n, n, tuple(gates))
