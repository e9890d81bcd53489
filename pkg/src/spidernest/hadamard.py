"""Hadamard mobility: push H gates towards the end of a circuit.

``move_h`` works on a private list of nodes.  Every rewrite either deletes gates
(cancellation, phase accumulation), moves an H strictly rightwards, or swaps an
H for a cheaper pattern, so H count never grows.  A fuel counter bounds the
total work as a guard against rule interactions we did not anticipate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from . import circuit as C
from .circuit import Circuit, Gate, gate, phase_gates

log = logging.getLogger(__name__)

DEFAULT_FUEL = 10**6
MAX_DEPTH = 6


class _OutOfFuel(Exception):
    pass


class _Node:
    __slots__ = ("gate", "noflip", "done")

    def __init__(self, g: Gate, noflip: bool = False):
        self.gate = g
        self.noflip = noflip  # CNOT already flipped, or born from a CZ rewrite
        self.done = False


def _is_phase1(g: Gate) -> bool:
    return g.kind in C.PHASE_OF and not g.cond


def commutes(g: Gate, h: Gate) -> bool:
    """Conservative syntactic commutation test."""
    if set(g.qubits).isdisjoint(h.qubits):
        return True
    if g.cond or h.cond:
        return False
    gd, hd = g.is_diagonal(), h.is_diagonal()
    if gd and hd:
        return True
    xs = (C.CNOT, C.CCNOT, C.MCT)
    if gd and h.kind in xs:
        return h.target not in g.qubits
    if hd and g.kind in xs:
        return g.target not in h.qubits
    if g.kind in xs and h.kind in xs:
        return g.target not in h.controls and h.target not in g.controls
    if g.kind == C.X and h.kind == C.X:
        return True
    if g.kind == C.X and h.kind in xs:
        return g.qubits[0] == h.target
    if h.kind == C.X and g.kind in xs:
        return h.qubits[0] == g.target
    return False


def _cancels(g: Gate, h: Gate) -> bool:
    if g.kind != h.kind or g.cond or h.cond:
        return False
    if g.kind in (C.CNOT, C.CCNOT, C.MCT):
        return g.target == h.target and set(g.controls) == set(h.controls)
    if g.kind in (C.CZ, C.CCZ, C.SWAP, C.X):
        return set(g.qubits) == set(h.qubits)
    return False


class _Mover:
    def __init__(self, gates, fuel: int):
        self.body = [_Node(g) for g in gates]
        self.tail: dict[int, None] = {}
        self.fuel = fuel
        self._last_h = 0

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise _OutOfFuel

    def next_on(self, i: int, qs) -> int | None:
        body = self.body
        for j in range(i + 1, len(body)):
            for q in body[j].gate.qubits:
                if q in qs:
                    return j
        return None

    def _hop(self, i: int, j: int) -> int:
        """Move the node at i to just after j (i < j); return its new index."""
        node = self.body.pop(i)
        self.body.insert(j, node)
        return j

    def _run_from(self, j: int, q: int) -> list[int]:
        run = [j]
        while True:
            m = self.next_on(run[-1], (q,))
            if m is None or not _is_phase1(self.body[m].gate):
                return run
            run.append(m)

    def _rewrite(self, delete, at: int | None = None, new=()) -> None:
        """Delete the indices in ``delete``; if ``at`` is given, replace it by ``new``."""
        delete = set(delete)
        out = []
        for idx, node in enumerate(self.body):
            if idx == at:
                out.extend(new)
            elif idx not in delete:
                out.append(node)
        self.body = out

    def _accumulate(self, run: list[int], q: int) -> int:
        total = sum(C.PHASE_OF[self.body[m].gate.kind] for m in run) % 8
        canon = phase_gates(q, total)
        if [g.kind for g in canon] != [self.body[m].gate.kind for m in run]:
            self.tick()
            self._rewrite(run[1:], run[0], [_Node(g) for g in canon])
        return total

    # ---- pushes: succeed only by merging/cancelling the pushed gate away ----

    def push(self, p: int, depth: int) -> bool:
        g = self.body[p].gate
        if g.kind == C.H:
            return False
        if _is_phase1(g):
            return self.push_phase(self._run_from(p, g.qubits[0]), depth)
        qs = set(g.qubits)
        m = p
        while True:
            self.tick()
            r = self.next_on(m, qs)
            if r is None:
                return False
            h = self.body[r].gate
            if _cancels(g, h):
                self._rewrite((p, r))
                return True
            if commutes(g, h):
                m = r
                continue
            if h.kind == C.H or depth >= MAX_DEPTH or not self.push(r, depth + 1):
                return False

    def push_phase(self, run: list[int], depth: int) -> bool:
        q = self.body[run[0]].gate.qubits[0]
        total = sum(C.PHASE_OF[self.body[m].gate.kind] for m in run)
        probe = gate(C.Z, q)
        m = run[-1]
        while True:
            self.tick()
            r = self.next_on(m, (q,))
            if r is None:
                return False
            h = self.body[r].gate
            if _is_phase1(h):
                run2 = self._run_from(r, q)
                total2 = total + sum(C.PHASE_OF[self.body[x].gate.kind] for x in run2)
                new = [_Node(g) for g in phase_gates(q, total2)]
                self._rewrite(run + run2[1:], run2[0], new)
                return True
            if commutes(probe, h):
                m = r
                continue
            if h.kind == C.H or depth >= MAX_DEPTH or not self.push(r, depth + 1):
                return False

    # ---- moving one H ----

    def move(self, i: int, depth: int = 0) -> int | None:
        """Move the H at index i rightwards; return its final index, or None if it left the body."""
        while True:
            self.tick()
            node = self.body[i]
            q = node.gate.qubits[0]
            j = self.next_on(i, (q,))
            if j is None:
                del self.body[i]
                if q in self.tail:
                    del self.tail[q]
                else:
                    self.tail[q] = None
                return None
            blocker = self.body[j]
            g = blocker.gate
            k = g.kind
            if g.cond:
                return i
            if k == C.H:
                self._rewrite((i, j))
                return None
            if k in (C.X, C.Z):
                blocker.gate = gate(C.Z if k == C.X else C.X, q)
                i = self._hop(i, j)
                continue
            if k == C.CNOT and g.target == q:
                self.body[j] = _Node(gate(C.CZ, g.controls[0], q))
                i = self._hop(i, j)
                continue
            if k == C.CZ:
                r = g.qubits[0] if g.qubits[1] == q else g.qubits[1]
                self.body[j] = _Node(gate(C.CNOT, r, q), noflip=True)
                i = self._hop(i, j)
                continue
            if k == C.SWAP:
                r = g.qubits[0] if g.qubits[1] == q else g.qubits[1]
                node.gate = gate(C.H, r)
                i = self._hop(i, j)
                continue
            if _is_phase1(g):
                run = self._run_from(j, q)
                total = self._accumulate(run, q)
                if total in (0, 4):
                    continue
                run = self._run_from(j, q)
                if total in (2, 6) and self._try_hsh(i, run[-1], q, depth):
                    i = self._last_h
                    continue
                if self.push_phase(run, depth):
                    continue
                return i
            if k == C.CNOT and g.controls[0] == q:
                t = g.target
                if depth < MAX_DEPTH:
                    a = self.next_on(j, (t,))
                    if a is not None and self.body[a].gate.kind == C.H:
                        self.move(a, depth + 1)
                    b = self.next_on(j, (q,))
                    if b is not None and self.body[b].gate.kind == C.H:
                        self.move(b, depth + 1)
                if not blocker.noflip:
                    a = self.next_on(j, (t,))
                    if a is not None and self.body[a].gate.kind == C.H:
                        i = self._flip(i, j, a, q, t, both_on_control=False)
                        continue
                    b = self.next_on(j, (q,))
                    if b is not None and self.body[b].gate.kind == C.H:
                        i = self._flip(i, j, b, q, t, both_on_control=True)
                        continue
            if depth < MAX_DEPTH and self.push(j, depth + 1):
                continue
            return i

    def _try_hsh(self, i: int, last: int, q: int, depth: int) -> bool:
        """H P H -> P' H P' for a lone S or S-dagger P between two H gates."""
        n = self.next_on(last, (q,))
        if n is None or self.body[n].gate.kind != C.H:
            return False
        if depth < MAX_DEPTH:
            self.move(n, depth + 1)
            n = self.next_on(last, (q,))
            if n is None or self.body[n].gate.kind != C.H:
                # the second H moved on; the outer loop will retry
                self._last_h = i
                return True
        self.tick()
        j = last
        inv = self.body[j].gate.inverse()
        self.body[j] = _Node(inv)
        self.body.insert(n + 1, _Node(inv))
        del self.body[i]
        self._last_h = n - 1
        return True

    def _flip(self, i, j, k, c, t, both_on_control: bool) -> int:
        """Rewrite H_c CNOT(c,t) H_x into H_y CNOT(t,c) H_z with the same H count."""
        self.tick()
        h_pre = gate(C.H, t)
        h_post = gate(C.H, t if both_on_control else c)
        cn = _Node(gate(C.CNOT, t, c), noflip=True)
        pre = _Node(h_pre)
        self._rewrite((i, k), j, [pre, cn, _Node(h_post)])
        return j - 1

    def run(self):
        i = 0
        while i < len(self.body):
            node = self.body[i]
            if node.gate.kind == C.H and not node.done:
                node.done = True
                self.move(i)
                continue
            i += 1


@dataclass(frozen=True)
class TripartiteCircuit:
    initial: Circuit
    main: Circuit
    final: Circuit

    def compose(self) -> Circuit:
        return self.initial + self.main + self.final


def move_h(c: Circuit, fuel: int = DEFAULT_FUEL) -> tuple[Circuit, Circuit]:
    """Move H gates rightwards; returns ``(tail, body)`` with ``body`` followed by ``tail`` equal to ``c``.

    The tail holds only the H gates that reached the end of the circuit.
    """
    m = _Mover(c.gates, fuel)
    try:
        m.run()
    except _OutOfFuel:
        log.warning("move_h ran out of fuel; returning the circuit unchanged")
        return c.with_gates(()), c
    tail = [gate(C.H, q) for q in m.tail]
    return c.with_gates(tail), c.with_gates(n.gate for n in m.body)


def _hoist_preps(c: Circuit) -> Circuit:
    preps = [g for g in c.gates if g.kind in (C.PREP_PLUS, C.PREP_MINUS_Y)]
    if not preps:
        return c
    rest = [g for g in c.gates if g.kind not in (C.PREP_PLUS, C.PREP_MINUS_Y)]
    return c.with_gates(preps + rest)


def split_tripartite(c: Circuit, fuel: int = DEFAULT_FUEL) -> TripartiteCircuit:
    if any(g.kind == C.CCNOT for g in c.gates):
        raise ValueError("split_tripartite expects a CCNOT-free circuit")
    c = _hoist_preps(c)
    preps = [g for g in c.gates if g.kind in (C.PREP_PLUS, C.PREP_MINUS_Y)]
    core = c.with_gates(c.gates[len(preps):])
    final, rest = move_h(core, fuel)
    ti, tm = move_h(rest.inverse(), fuel)
    initial = ti.inverse()
    initial = initial.with_gates(preps + list(initial.gates))
    return TripartiteCircuit(initial, tm.inverse(), final)
