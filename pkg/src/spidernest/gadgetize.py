"""From a Clifford+T/Toffoli circuit to (initial Clifford, diagonal phi, final Clifford).

The main body is rewritten into parity-phase gadgets.  Everything that is not a
gadget is commuted out of it: preparations to the left, Pauli X frames, SWAPs,
measurements and conditioned corrections to the right, and each CNOT to
whichever side the left/right heuristic prefers.  Gadgets are conjugated as
gates pass them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import circuit as C
from .circuit import Circuit, Gate, gadget, gate
from .hadamard import split_tripartite
from .phasepoly import HomogeneousCircuit, support, synthesize

log = logging.getLogger(__name__)


@dataclass
class DecomposedCircuit:
    initial: Circuit
    phi: HomogeneousCircuit
    final: Circuit
    n_original: int
    delta_n: int
    stats: dict = field(default_factory=dict)

    def recompose(self, phi: HomogeneousCircuit | None = None) -> Circuit:
        phi = self.phi if phi is None else phi
        body = synthesize(phi).gates
        return self.initial.with_gates(self.initial.gates + body + self.final.gates)


def replace_ccnot(c: Circuit) -> Circuit:
    if not any(g.kind == C.CCNOT for g in c.gates):
        return c
    out = []
    for g in c.gates:
        if g.kind == C.CCNOT:
            t = g.target
            out += [gate(C.H, t), gate(C.CCZ, *g.qubits), gate(C.H, t)]
        else:
            out.append(g)
    return c.with_gates(out)


def expand_diagonal(g: Gate) -> list[tuple[tuple[int, ...], int]]:
    """Gadgets (support, coefficient) whose product equals ``g`` up to global phase."""
    k = g.kind
    if k in C.PHASE_OF:
        return [(g.qubits, C.PHASE_OF[k])]
    if k == C.PHASE:
        return [(g.qubits, g.phase)]
    if k == C.CZ:
        h, j = g.qubits
        return [((h,), 2), ((j,), 2), (tuple(sorted((h, j))), 6)]
    if k == C.CCZ:
        a, b, d = g.qubits
        out = [((q,), 1) for q in (a, b, d)]
        out += [(tuple(sorted(p)), 7) for p in ((a, b), (a, d), (b, d))]
        out.append((tuple(sorted((a, b, d))), 1))
        return out
    raise ValueError(f"cannot expand {g!r} into phase gadgets")


def hadamard_gadget(q: int, aux: int, bit: int) -> list[Gate]:
    """Measurement-based H on ``q`` using a fresh auxiliary ``aux`` and outcome bit ``bit``.

    On the ``|+>`` outcome the logical state continues on ``q`` with H applied;
    the conditioned X repairs the other outcome.
    """
    return [
        gate(C.PREP_MINUS_Y, aux),
        gate(C.SWAP, q, aux),
        gadget((q, aux), 2),
        gadget((aux,), 6),
        gate(C.MEASX, aux, bit=bit),
        Gate(C.X, (q,), cond=frozenset({bit})),
    ]


def hadamard_gadgetize(main: Circuit) -> Circuit:
    if not any(g.kind == C.H for g in main.gates):
        return main
    n, bits = main.n_total, main.bit_count
    out = []
    for g in main.gates:
        if g.kind == C.CCNOT:
            raise ValueError("hadamard_gadgetize expects a CCNOT-free circuit")
        if g.kind == C.H:
            out += hadamard_gadget(g.qubits[0], n, bits)
            n += 1
            bits += 1
        else:
            out.append(g)
    return main.with_gates(out, n_total=n, bit_count=bits)


# ----------------------------------------------------------------------------
# Clifford extraction
#
# Gadgets are handled internally as Gate(PHASE, ...).  ``[a, b] -> [b', a'...]``
# below means the two gates appear in that order in the circuit.

def _conj_cnot(g: Gate, c: int, t: int) -> Gate:
    """Conjugate a gadget by CNOT(c, t): S -> S ^ {c} when t is in S."""
    if t not in g.qubits:
        return g
    s = set(g.qubits) ^ {c}
    return Gate(C.PHASE, tuple(sorted(s)), phase=g.phase, cond=g.cond)


def _is_right_mover(g: Gate) -> bool:
    return g.kind in (C.X, C.SWAP, C.MEASX) or (g.kind == C.PHASE and bool(g.cond))


def _pass(p: Gate, h: Gate) -> tuple[Gate, list[Gate]]:
    """Rewrite ``[p, h]`` (p a right mover) as ``[h', *ps]``."""
    k = p.kind
    if k == C.SWAP:
        a, b = p.qubits
        return h.relabel({a: b, b: a}), [p]
    if k == C.MEASX:
        if p.qubits[0] in h.qubits:
            raise ValueError(f"{h!r} acts on measured qubit after {p!r}")
        return h, [p]
    if k == C.X:
        b = p.qubits[0]
        if h.kind == C.CNOT:
            c, t = h.qubits
            if b == c:
                return h, [p, Gate(C.X, (t,), cond=p.cond)]
            return h, [p]
        if h.kind == C.PHASE:
            if b not in h.qubits:
                return h, [p]
            if not p.cond:
                return h.inverse(), [p]
            if h.cond:
                raise ValueError("conditioned X met a conditioned gadget")
            spawn = (-2 * h.phase) % 8
            return h, ([Gate(C.PHASE, h.qubits, phase=spawn, cond=p.cond)] if spawn else []) + [p]
    if k == C.PHASE:
        if h.kind == C.CNOT:
            return h, [_conj_cnot(p, *h.qubits)]
        if h.kind == C.PHASE:
            return h, [p]
    raise ValueError(f"no commutation rule for {p!r} past {h!r}")


def _pass_packet(h: Gate, packet: list[Gate]) -> tuple[Gate, list[Gate]]:
    new: list[Gate] = []
    for p in reversed(packet):
        h, ps = _pass(p, h)
        new = ps + new
    return h, new


def _counts(gadgets, c: int, t: int) -> tuple[int, int]:
    plus = minus = 0
    for g in gadgets:
        if g.kind != C.PHASE or t not in g.qubits:
            continue
        if c in g.qubits:
            minus += 1
        else:
            plus += 1
    return plus, minus


def _cnots_commute(a: Gate, b: Gate) -> bool:
    return a.qubits[1] != b.qubits[0] and a.qubits[0] != b.qubits[1]


def extract_clifford(main: Circuit) -> tuple[list[Gate], list[Gate], list[Gate]]:
    """Split a gadgetized main body into (pre, gadgets, post).

    ``gadgets`` are unconditioned PHASE gates; conditioned ones end up in ``post``.
    """
    gs: list[Gate] = []
    preps: list[Gate] = []
    for g in main.gates:
        if g.kind in (C.PREP_PLUS, C.PREP_MINUS_Y):
            preps.append(g)
        elif g.kind in C.DIAGONAL_KINDS and not g.cond:
            gs += [gadget(s, k) for s, k in expand_diagonal(g) if k % 8]
        elif g.kind in (C.CNOT, C.X, C.SWAP, C.MEASX) or (g.kind == C.PHASE and g.cond):
            gs.append(g)
        else:
            raise ValueError(f"unexpected gate in main body: {g!r}")

    # right movers, last first; each is swept past the remaining gadgets and CNOTs
    movers: list[Gate] = []
    i = len(gs) - 1
    while i >= 0:
        if _is_right_mover(gs[i]):
            packet = [gs[i]]
            after = []
            for h in gs[i + 1:]:
                h, packet = _pass_packet(h, packet)
                after.append(h)
            gs = gs[:i] + after
            movers = packet + movers
        i -= 1

    # CNOTs, leftmost first
    left: list[Gate] = []
    right: list[Gate] = []
    while True:
        j = next((x for x, g in enumerate(gs) if g.kind == C.CNOT), None)
        if j is None:
            break
        cn = gs[j]
        c, t = cn.qubits
        pl, ml = _counts(gs[:j], c, t)
        pr, mr = _counts(gs[j + 1:], c, t)
        if pl - ml < pr - mr:
            gs = [_conj_cnot(g, c, t) for g in gs[:j]] + gs[j + 1:]
            left.append(cn)
            continue
        packet = [cn]
        after = []
        for h in gs[j + 1:]:
            if h.kind == C.PHASE:
                for p in reversed(packet):
                    h = _conj_cnot(h, *p.qubits)
                after.append(h)
            elif all(_cnots_commute(p, h) for p in packet):
                after.append(h)
            else:
                packet.append(h)
        gs = gs[:j] + after
        right = packet + right

    return preps + left, gs, right + movers


def run_pipeline(c: Circuit) -> DecomposedCircuit:
    """CCNOT rewriting, tripartite split, H gadgets, gadget extraction and fusion."""
    raw = C.expanded_t_count(c)
    c = replace_ccnot(C.decompose_mct(c))
    n0 = c.n_total
    tri = split_tripartite(c)
    main = hadamard_gadgetize(tri.main)
    pre, gadgets, post = extract_clifford(main)
    n = main.n_total
    phi = HomogeneousCircuit(n)
    for g in gadgets:
        phi.add(support(g.qubits), g.phase)
    initial = main.with_gates(tri.initial.gates + tuple(pre))
    final = main.with_gates(tuple(post) + tri.final.gates)
    stats = {
        "t_raw": raw,
        "t_emitted": sum(g.phase & 1 for g in gadgets),
        "h_total": c.h_count(),
        "h_main": tri.main.h_count(),
    }
    return DecomposedCircuit(initial, phi, final, n0, n - n0, stats)
