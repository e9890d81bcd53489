"""Correctness oracles.

``diag_equiv`` compares two homogeneous circuits on every basis state using
exact Z8 arithmetic.  ``circuit_equiv_postselected`` simulates whole circuits
(preparations, X-basis measurements, conditioned corrections) on every input
basis state with a dense statevector and compares the resulting maps on the
input register up to one global scalar.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import circuit as C
from .circuit import Circuit, Gate
from .phasepoly import HomogeneousCircuit, ORACLE_LIMIT, phase_table

MAX_QUBITS = 12
DEFAULT_TOL = 1e-9

_W = np.exp(1j * np.pi / 4)
_SQ = 1 / np.sqrt(2)


class VerificationLimitError(ValueError):
    pass


class PostselectionError(ValueError):
    pass


@dataclass
class EquivalenceReport:
    equivalent: bool
    max_deviation: float
    global_phase: complex | None = None
    basis_witness: tuple[int, ...] | None = None
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.equivalent

    def summary(self) -> str:
        if self.equivalent:
            return f"equivalent (max deviation {self.max_deviation:.3g})"
        return f"NOT equivalent (max deviation {self.max_deviation:.3g}, witness {self.basis_witness})"


def _int_to_bits(z: int, n: int) -> tuple[int, ...]:
    return tuple((z >> q) & 1 for q in range(n))


def diag_equiv(h1: HomogeneousCircuit, h2: HomogeneousCircuit, limit: int = ORACLE_LIMIT) -> EquivalenceReport:
    if h1.n != h2.n:
        raise ValueError(f"qubit counts differ: {h1.n} vs {h2.n}")
    if h1.n > limit:
        raise VerificationLimitError(f"{h1.n} qubits exceeds the diagonal oracle limit {limit}")
    diff = (phase_table(h1, limit) - phase_table(h2, limit)) % 8
    bad = np.flatnonzero(diff)
    if bad.size == 0:
        return EquivalenceReport(True, 0.0, 1.0 + 0j)
    z = int(bad[0])
    dev = float(np.abs(_W ** diff - 1).max())
    return EquivalenceReport(False, dev, None, _int_to_bits(z, h1.n))


# ----------------------------------------------------------------------------
# statevector simulation
#
# The state is an array of shape (2,)*N + (B,), one column per input basis
# state.  Axis q is qubit q.

def _sl(ndim: int, fixed: dict[int, int]):
    idx = [slice(None)] * ndim
    for q, v in fixed.items():
        idx[q] = v
    return tuple(idx)


def _apply_x(st, q, ctrl=()):
    nd = st.ndim
    fixed = {c: 1 for c in ctrl}
    a = st[_sl(nd, {**fixed, q: 0})].copy()
    st[_sl(nd, {**fixed, q: 0})] = st[_sl(nd, {**fixed, q: 1})]
    st[_sl(nd, {**fixed, q: 1})] = a


def _apply_phase(st, qs, factor):
    st[_sl(st.ndim, {q: 1 for q in qs})] *= factor


def _apply_h(st, q):
    nd = st.ndim
    a = st[_sl(nd, {q: 0})].copy()
    b = st[_sl(nd, {q: 1})]
    st[_sl(nd, {q: 0})] = (a + b) * _SQ
    st[_sl(nd, {q: 1})] = (a - b) * _SQ


def _parity_grid(n: int, qs) -> np.ndarray:
    shape = [1] * n
    grid = np.zeros([2] * n, dtype=np.int8) if qs else None
    for q in qs:
        s = list(shape)
        s[q] = 2
        grid = grid ^ np.arange(2, dtype=np.int8).reshape(s)
    return grid


def _apply_gadget(st, n, qs, k):
    par = _parity_grid(n, qs)
    st *= (_W ** (k * par.astype(float)))[..., None]


def _apply_unitary(st, n, g: Gate):
    k = g.kind
    if k == C.X:
        _apply_x(st, g.qubits[0])
    elif k in (C.CNOT, C.CCNOT, C.MCT):
        _apply_x(st, g.target, g.controls)
    elif k in C.PHASE_OF:
        _apply_phase(st, g.qubits, _W ** C.PHASE_OF[k])
    elif k in (C.CZ, C.CCZ):
        _apply_phase(st, g.qubits, -1)
    elif k == C.H:
        _apply_h(st, g.qubits[0])
    elif k == C.SWAP:
        a, b = g.qubits
        st[...] = np.swapaxes(st, a, b).copy()
    elif k == C.PHASE:
        _apply_gadget(st, n, g.qubits, g.phase)
    else:
        raise ValueError(f"cannot simulate {g!r} as a unitary")


def postselected_operator(c: Circuit, outcomes: dict[int, int] | None = None,
                          max_qubits: int = MAX_QUBITS) -> tuple[np.ndarray, float]:
    """Map from input basis states to the input register, with auxiliaries projected.

    Every ``MeasX`` is projected onto the outcome given in ``outcomes`` (default
    0, i.e. ``|+>``) and the measured qubit is reset to ``|0>``.  Conditioned
    gates fire when the parity of their bits is 1.  At the end every auxiliary
    is projected onto ``|0>``; the returned leakage is the weight that projection
    discarded, relative to the kept weight.
    """
    n, nin = c.n_total, c.n_inputs
    if n > max_qubits:
        raise VerificationLimitError(f"{n} qubits exceeds the statevector limit of {max_qubits}")
    outcomes = outcomes or {}
    B = 1 << nin
    st = np.zeros((1 << n, B), dtype=complex)
    cols = np.arange(B)
    # qubit q <-> axis q, so input x with bit q for qubit q sits at a big-endian row index
    rows = np.zeros(B, dtype=np.int64)
    for q in range(nin):
        rows |= ((cols >> q) & 1) << (n - 1 - q)
    st[rows, cols] = 1
    st = st.reshape((2,) * n + (B,))
    bits: dict[int, int] = {}
    for g in c.gates:
        if g.cond:
            if sum(bits.get(b, 0) for b in g.cond) % 2 == 0:
                continue
            g = Gate(g.kind, g.qubits, phase=g.phase)
        if g.kind == C.PREP_PLUS:
            _apply_h(st, g.qubits[0])
        elif g.kind == C.PREP_MINUS_Y:
            _apply_h(st, g.qubits[0])
            _apply_phase(st, g.qubits, _W ** 6)
        elif g.kind == C.MEASX:
            q = g.qubits[0]
            o = outcomes.get(g.bit, 0)
            bits[g.bit] = o
            _apply_h(st, q)
            st[_sl(st.ndim, {q: 1 - o})] = 0
            if o:
                _apply_x(st, q)
        else:
            _apply_unitary(st, n, g)
    st = st.reshape(1 << nin, 1 << (n - nin), B)
    kept = st[:, 0, :]
    total = float(np.vdot(st, st).real)
    kept_w = float(np.vdot(kept, kept).real)
    if kept_w <= 1e-300:
        raise PostselectionError("post-selected branch has zero norm")
    # kept rows are indexed big-endian over inputs; re-index to the column convention
    perm = np.zeros(B, dtype=np.int64)
    for q in range(nin):
        perm |= ((cols >> q) & 1) << (nin - 1 - q)
    return kept[perm, :], (total - kept_w) / kept_w


def _compare(m1: np.ndarray, m2: np.ndarray, tol: float) -> EquivalenceReport:
    d = m1.shape[1]
    n1, n2 = np.linalg.norm(m1), np.linalg.norm(m2)
    if n1 == 0 or n2 == 0:
        raise PostselectionError("post-selected branch has zero norm")
    a = m1 * (np.sqrt(d) / n1)
    b = m2 * (np.sqrt(d) / n2)
    ov = np.vdot(a, b)
    phase = ov / abs(ov) if abs(ov) > 1e-12 else 1.0 + 0j
    diff = np.abs(b - phase * a)
    dev = float(diff.max())
    if dev <= tol:
        return EquivalenceReport(True, dev, complex(phase))
    col = int(np.argmax(diff.max(axis=0)))
    nin = int(np.log2(d))
    return EquivalenceReport(False, dev, None, _int_to_bits(col, nin))


def circuit_equiv_postselected(c1: Circuit, c2: Circuit, tol: float = DEFAULT_TOL,
                               max_qubits: int = MAX_QUBITS) -> EquivalenceReport:
    """Compare two circuits on the ``|+>`` post-selected branch, up to a global scalar."""
    if c1.n_inputs != c2.n_inputs:
        raise ValueError(f"input registers differ: {c1.n_inputs} vs {c2.n_inputs}")
    m1, leak1 = postselected_operator(c1, max_qubits=max_qubits)
    m2, leak2 = postselected_operator(c2, max_qubits=max_qubits)
    rep = _compare(m1, m2, tol)
    leak = max(leak1, leak2)
    rep.detail["aux_leakage"] = leak
    if leak > tol:
        rep.equivalent = False
        rep.max_deviation = max(rep.max_deviation, float(np.sqrt(leak)))
    return rep


def circuit_equiv_all_branches(c1: Circuit, c2: Circuit, tol: float = DEFAULT_TOL,
                               max_qubits: int = MAX_QUBITS) -> EquivalenceReport:
    """Check ``c2`` against the unitary ``c1`` on every measurement-outcome branch of ``c2``.

    Exercises the conditioned corrections, which the post-selected check skips.
    Every branch must reproduce ``c1`` up to a global scalar of the same magnitude.
    """
    m1, _ = postselected_operator(c1, max_qubits=max_qubits)
    meas = sorted(g.bit for g in c2.gates if g.kind == C.MEASX)
    worst = None
    norms = []
    for pattern in range(1 << len(meas)):
        outcomes = {b: (pattern >> i) & 1 for i, b in enumerate(meas)}
        m2, leak = postselected_operator(c2, outcomes, max_qubits=max_qubits)
        norms.append(float(np.linalg.norm(m2)))
        rep = _compare(m1, m2, tol)
        rep.detail["outcomes"] = outcomes
        if leak > tol:
            rep.equivalent = False
        if worst is None or (worst.equivalent and not rep.equivalent) or \
                (worst.equivalent == rep.equivalent and rep.max_deviation > worst.max_deviation):
            worst = rep
    spread = max(norms) - min(norms)
    worst.detail["branch_norms"] = norms
    if spread > 1e-6 * max(norms):
        worst.equivalent = False
    return worst


def circuit_phase_polynomial(c: Circuit) -> HomogeneousCircuit:
    """Phase polynomial of a circuit over {X, CNOT, SWAP} and diagonal gates.

    Each wire is tracked as an affine parity of the inputs.  Raises ValueError
    unless the circuit's net permutation of basis states is the identity.
    """
    from .gadgetize import expand_diagonal

    n = c.n_total
    lin = [1 << q for q in range(n)]
    aff = [0] * n
    h = HomogeneousCircuit(n)
    for g in c.gates:
        if g.cond:
            raise ValueError(f"conditioned gate {g!r} in diagonal mode")
        k = g.kind
        if k == C.X:
            aff[g.qubits[0]] ^= 1
        elif k == C.CNOT:
            a, b = g.qubits
            lin[b] ^= lin[a]
            aff[b] ^= aff[a]
        elif k == C.SWAP:
            a, b = g.qubits
            lin[a], lin[b] = lin[b], lin[a]
            aff[a], aff[b] = aff[b], aff[a]
        elif g.is_diagonal():
            for qs, phase in expand_diagonal(g):
                m = flip = 0
                for q in qs:
                    m ^= lin[q]
                    flip ^= aff[q]
                if m:
                    h.add(m, -phase if flip else phase)
        else:
            raise ValueError(f"{g!r} is not allowed in diagonal mode")
    if lin != [1 << q for q in range(n)] or any(aff):
        raise ValueError("circuit is not diagonal: it permutes basis states")
    return h
