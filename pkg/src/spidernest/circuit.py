"""Circuit data model, ``.qc`` reading/writing and whole-circuit utilities.

Qubits are dense integer indices.  Indices ``< n_inputs`` are the declared
input register; higher indices are auxiliaries, which start in ``|0>`` unless a
preparation gate says otherwise (the usual ``.qc`` convention for variables
missing from the ``.i`` line).
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

# gate kinds
X, Z, S, SDG, T, TDG, H = "X", "Z", "S", "Sdg", "T", "Tdg", "H"
CNOT, CZ, SWAP, CCNOT, CCZ, MCT = "CNOT", "CZ", "SWAP", "CCNOT", "CCZ", "MCT"
PREP_PLUS, PREP_MINUS_Y, MEASX = "PrepPlus", "PrepMinusY", "MeasX"
PHASE = "Phase"  # parity-phase gadget on ``qubits`` with coefficient ``phase`` (units of pi/4)

_FIXED_ARITY = {
    X: 1, Z: 1, S: 1, SDG: 1, T: 1, TDG: 1, H: 1,
    CNOT: 2, CZ: 2, SWAP: 2, CCNOT: 3, CCZ: 3,
    PREP_PLUS: 1, PREP_MINUS_Y: 1, MEASX: 1,
}
# single-qubit diagonal gates as Z8 phases
PHASE_OF = {T: 1, S: 2, Z: 4, SDG: 6, TDG: 7}
_INVERSE_KIND = {T: TDG, TDG: T, S: SDG, SDG: S}
CLIFFORD_KINDS = frozenset({X, Z, S, SDG, H, CNOT, CZ, SWAP, PREP_PLUS, PREP_MINUS_Y, MEASX})
DIAGONAL_KINDS = frozenset({Z, S, SDG, T, TDG, CZ, CCZ, PHASE})


class CircuitError(ValueError):
    pass


class QcParseError(CircuitError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``qubits`` is ordered: for CNOT/CCNOT/MCT the target comes last.  A gate
    with a nonempty ``cond`` is classically conditioned on the parity of the
    listed outcome bits.
    """

    kind: str
    qubits: tuple[int, ...]
    phase: int = 0
    bit: int | None = None
    cond: frozenset[int] = frozenset()

    def __post_init__(self):
        q = self.qubits
        if len(set(q)) != len(q):
            raise CircuitError(f"{self.kind}: repeated qubit in {q}")
        if self.kind in _FIXED_ARITY:
            if len(q) != _FIXED_ARITY[self.kind]:
                raise CircuitError(f"{self.kind} expects {_FIXED_ARITY[self.kind]} qubits, got {len(q)}")
        elif self.kind == MCT:
            if len(q) < 1:
                raise CircuitError("MCT needs a target")
        elif self.kind == PHASE:
            if not q:
                raise CircuitError("phase gadget needs a nonempty support")
            if tuple(sorted(q)) != q:
                object.__setattr__(self, "qubits", tuple(sorted(q)))
            object.__setattr__(self, "phase", self.phase % 8)
        else:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if (self.kind == MEASX) != (self.bit is not None):
            raise CircuitError("MeasX (and only MeasX) carries an outcome bit")
        if self.cond and self.kind not in (X, Z, S, SDG, CNOT, CZ, PHASE):
            raise CircuitError(f"{self.kind} cannot be classically conditioned")

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    def is_clifford(self) -> bool:
        if self.kind == PHASE:
            return self.phase % 2 == 0
        return self.kind in CLIFFORD_KINDS

    def is_diagonal(self) -> bool:
        return self.kind in DIAGONAL_KINDS

    def inverse(self) -> "Gate":
        if self.kind in (PREP_PLUS, PREP_MINUS_Y, MEASX):
            raise CircuitError(f"{self.kind} has no inverse")
        if self.kind in _INVERSE_KIND:
            return replace(self, kind=_INVERSE_KIND[self.kind])
        if self.kind == PHASE:
            return replace(self, phase=-self.phase % 8)
        return self

    def relabel(self, mapping) -> "Gate":
        return replace(self, qubits=tuple(mapping.get(q, q) for q in self.qubits))

    def __repr__(self):
        args = ",".join(map(str, self.qubits))
        extra = ""
        if self.kind == PHASE:
            extra = f":{self.phase}"
        if self.bit is not None:
            extra = f"->s{self.bit}"
        if self.cond:
            extra += "|" + "^".join(f"s{b}" for b in sorted(self.cond))
        return f"{self.kind}({args}{extra})"


def gate(kind: str, *qubits: int, **kw) -> Gate:
    return Gate(kind, tuple(qubits), **kw)


def gadget(qubits: Iterable[int], phase: int, cond: Iterable[int] = ()) -> Gate:
    return Gate(PHASE, tuple(sorted(qubits)), phase=phase, cond=frozenset(cond))


@dataclass(frozen=True)
class Circuit:
    n_inputs: int
    n_total: int
    gates: tuple[Gate, ...] = ()
    labels: tuple[str, ...] = ()
    bit_count: int = 0

    def __post_init__(self):
        if not isinstance(self.gates, tuple):
            object.__setattr__(self, "gates", tuple(self.gates))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(default_label(i) for i in range(self.n_total)))
        if len(self.labels) != self.n_total:
            raise CircuitError("one label per qubit required")
        if self.n_inputs > self.n_total:
            raise CircuitError("n_inputs exceeds n_total")
        for g in self.gates:
            if any(q >= self.n_total or q < 0 for q in g.qubits):
                raise CircuitError(f"{g!r} references a qubit outside 0..{self.n_total - 1}")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def with_gates(self, gates: Iterable[Gate], n_total: int | None = None,
                   bit_count: int | None = None) -> "Circuit":
        n_total = self.n_total if n_total is None else n_total
        labels = self.labels
        if n_total > len(labels):
            labels = labels + tuple(_fresh_labels(labels, n_total - len(labels)))
        return Circuit(self.n_inputs, n_total, tuple(gates), labels,
                       self.bit_count if bit_count is None else bit_count)

    def __add__(self, other: "Circuit") -> "Circuit":
        n = max(self.n_total, other.n_total)
        labels = self.labels if self.n_total >= other.n_total else other.labels
        return Circuit(self.n_inputs, n, self.gates + other.gates, labels,
                       max(self.bit_count, other.bit_count))

    def h_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == H)

    def is_clifford(self) -> bool:
        return all(g.is_clifford() for g in self.gates)

    def inverse(self) -> "Circuit":
        return replace(self, gates=tuple(g.inverse() for g in reversed(self.gates)))


def default_label(i: int) -> str:
    return f"q{i}"


def _fresh_labels(existing: Sequence[str], count: int) -> list[str]:
    taken = set(existing)
    out, i = [], 0
    while len(out) < count:
        name = f"anc{i}"
        if name not in taken:
            out.append(name)
            taken.add(name)
        i += 1
    return out


def t_count_gates(c: Circuit) -> int:
    """Number of T and T-dagger gates in the gate list."""
    return sum(1 for g in c.gates if g.kind in (T, TDG))


def expanded_t_count(c: Circuit) -> int:
    """T-count with every CCZ/CCNOT counted at 7 (after MCT decomposition).

    This is the conventional "input T-count" of a Toffoli benchmark.
    """
    c = decompose_mct(c)
    n = 0
    for g in c.gates:
        if g.kind in (T, TDG):
            n += 1
        elif g.kind in (CCZ, CCNOT):
            n += 7
        elif g.kind == PHASE and g.phase % 2:
            n += 1
    return n


# ----------------------------------------------------------------------------
# .qc parsing

_ALIASES = {
    "tof": "tof", "cnot": "tof", "not": "tof", "x": "tof",
    "h": H, "z": "z", "s": S, "p": S, "s*": SDG, "p*": SDG,
    "t": T, "t*": TDG, "swap": SWAP, "cz": "z", "ccz": "z",
    "prep-y": PREP_MINUS_Y, "prep-plus": PREP_PLUS, "prep-+": PREP_PLUS,
    "measx": MEASX, "cond": "cond",
}
_BIT = re.compile(r"^s(\d+)$")


def _multi_x(qs: tuple[int, ...]) -> Gate:
    kind = {1: X, 2: CNOT, 3: CCNOT}.get(len(qs), MCT)
    return Gate(kind, qs)


def _multi_z(qs: tuple[int, ...]) -> Gate:
    kind = {1: Z, 2: CZ, 3: CCZ}.get(len(qs))
    if kind is None:
        raise CircuitError("Z with more than 3 arguments is not supported")
    return Gate(kind, qs)


def parse_qc(text: str) -> Circuit:
    """Parse a ``.qc`` document."""
    names: list[str] | None = None
    inputs: list[str] | None = None
    body: list[tuple[int, list[str]]] = []
    state = "header"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if state == "header":
            if head == ".v":
                names = toks[1:]
            elif head == ".i":
                inputs = toks[1:]
            elif head == ".o":
                pass
            elif head.upper() == "BEGIN":
                state = "body"
                if len(toks) > 1:
                    raise QcParseError("unexpected tokens after BEGIN", lineno)
            elif head.startswith("."):
                log.warning("line %d: ignoring unknown directive %s", lineno, head)
            else:
                raise QcParseError(f"expected header or BEGIN, got {head!r}", lineno)
        elif state == "body":
            if head.upper() == "END":
                state = "done"
            else:
                body.append((lineno, toks))
        else:
            raise QcParseError("content after END", lineno)
    if state != "done":
        raise QcParseError("missing BEGIN/END block")
    if names is None:
        raise QcParseError("missing .v header")
    if len(set(names)) != len(names):
        raise QcParseError("duplicate variable in .v")
    if inputs is None:
        inputs = list(names)
    for nm in inputs:
        if nm not in names:
            raise QcParseError(f"input {nm!r} not declared in .v")
    order = [nm for nm in names if nm in set(inputs)] + [nm for nm in names if nm not in set(inputs)]
    index = {nm: i for i, nm in enumerate(order)}

    def qubits(args, lineno):
        out = []
        for a in args:
            if a not in index:
                raise QcParseError(f"undeclared variable {a!r}", lineno)
            out.append(index[a])
        return tuple(out)

    def bitno(tok, lineno):
        m = _BIT.match(tok)
        if not m:
            raise QcParseError(f"bad outcome bit {tok!r}", lineno)
        return int(m.group(1))

    def one(lineno, toks, cond=frozenset()):
        name = toks[0].lower()
        kind = _ALIASES.get(name)
        if kind is None:
            raise QcParseError(f"unknown gate {toks[0]!r}", lineno)
        args = toks[1:]
        try:
            if kind == "cond":
                if len(args) < 2:
                    raise QcParseError("cond needs a bit list and a gate", lineno)
                bits = frozenset(bitno(b, lineno) for b in args[0].split("^"))
                return one(lineno, args[1:], bits)
            if kind == MEASX:
                if len(args) != 3 or args[1] != "->":
                    raise QcParseError("expected 'measx <q> -> s<k>'", lineno)
                return Gate(MEASX, qubits(args[:1], lineno), bit=bitno(args[2], lineno))
            if kind == "tof":
                g = _multi_x(qubits(args, lineno))
            elif kind == "z":
                g = _multi_z(qubits(args, lineno))
            else:
                g = Gate(kind, qubits(args, lineno))
            return replace(g, cond=cond) if cond else g
        except CircuitError as e:
            if isinstance(e, QcParseError):
                raise
            raise QcParseError(str(e), lineno) from None

    gates = [one(lineno, toks) for lineno, toks in body]
    bits = [g.bit for g in gates if g.bit is not None] + [b for g in gates for b in g.cond]
    return Circuit(len(inputs), len(order), tuple(gates), tuple(order), max(bits, default=-1) + 1)


# ----------------------------------------------------------------------------
# .qc writing

_QC_NAME = {X: "tof", CNOT: "tof", CCNOT: "tof", MCT: "tof", H: "H", Z: "Z", CZ: "Z",
            CCZ: "Z", S: "S", SDG: "S*", T: "T", TDG: "T*", SWAP: "swap"}
_PHASE_GATES = {1: [T], 2: [S], 3: [S, T], 4: [Z], 5: [Z, T], 6: [SDG], 7: [TDG]}


def phase_gates(q: int, k: int) -> list[Gate]:
    """Single-qubit gates realising relative phase k*pi/4 on qubit q (one T at most)."""
    return [Gate(kind, (q,)) for kind in _PHASE_GATES.get(k % 8, [])]


def gadget_gates(support: Sequence[int], k: int, cond: frozenset[int] = frozenset()) -> list[Gate]:
    """CNOT ladder onto the highest qubit, the phase there, and the mirrored ladder."""
    members = sorted(support)
    tgt = members[-1]
    ladder = [Gate(CNOT, (m, tgt)) for m in members[:-1]]
    core = [replace(g, cond=cond) if cond else g for g in phase_gates(tgt, k)]
    if not core:
        return []
    return ladder + core + ladder[::-1]


def write_qc(c: Circuit, extended: bool = False) -> str:
    """Serialise ``c``; preparations, measurements and conditioned gates need ``extended``."""
    lab = c.labels
    lines = [".v " + " ".join(lab), ".i " + " ".join(lab[: c.n_inputs])]
    if c.n_inputs:
        lines.append(".o " + " ".join(lab[: c.n_inputs]))
    lines += ["", "BEGIN"]

    def emit(g: Gate):
        args = " ".join(lab[q] for q in g.qubits)
        if g.kind == PHASE:
            for h in gadget_gates(g.qubits, g.phase, g.cond):
                emit(h)
            return
        if g.kind in (PREP_PLUS, PREP_MINUS_Y, MEASX) or g.cond:
            if not extended:
                raise CircuitError(f"{g!r} needs extended .qc output")
        if g.kind == PREP_PLUS:
            lines.append(f"prep-plus {args}")
        elif g.kind == PREP_MINUS_Y:
            lines.append(f"prep-y {args}")
        elif g.kind == MEASX:
            lines.append(f"measx {args} -> s{g.bit}")
        else:
            text = f"{_QC_NAME[g.kind]} {args}"
            if g.cond:
                text = "cond " + "^".join(f"s{b}" for b in sorted(g.cond)) + " " + text
            lines.append(text)

    for g in c.gates:
        emit(g)
    lines.append("END")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# transformations

def decompose_mct(c: Circuit) -> Circuit:
    """Replace every MCT with more than two controls by a CCNOT compute/uncompute ladder.

    Each intermediate conjunction gets its own fresh auxiliary (starting in |0>).
    """
    if not any(g.kind == MCT for g in c.gates):
        return c
    n_total = c.n_total
    out: list[Gate] = []
    for g in c.gates:
        if g.kind != MCT:
            out.append(g)
            continue
        ctrl, tgt = g.controls, g.target
        if len(ctrl) <= 2:
            out.append(_multi_x(g.qubits))
            continue
        anc = list(range(n_total, n_total + len(ctrl) - 2))
        n_total += len(anc)
        compute = [Gate(CCNOT, (ctrl[0], ctrl[1], anc[0]))]
        for i in range(1, len(anc)):
            compute.append(Gate(CCNOT, (anc[i - 1], ctrl[i + 1], anc[i])))
        out += compute
        out.append(Gate(CCNOT, (anc[-1], ctrl[-1], tgt)))
        out += compute[::-1]
    return c.with_gates(out, n_total=n_total)


def classical_action(c: Circuit, bits: Sequence[int]) -> tuple[int, ...]:
    """Run a classical reversible circuit (X/CNOT/CCNOT/MCT/SWAP) on a bit vector.

    ``bits`` covers the inputs; auxiliaries start at 0.  Returns all ``n_total`` bits.
    """
    v = list(bits) + [0] * (c.n_total - len(bits))
    for g in c.gates:
        if g.kind in (X, CNOT, CCNOT, MCT):
            if all(v[q] for q in g.controls):
                v[g.target] ^= 1
        elif g.kind == SWAP:
            a, b = g.qubits
            v[a], v[b] = v[b], v[a]
        elif g.is_diagonal():
            continue
        else:
            raise CircuitError(f"{g!r} is not a classical reversible gate")
    return tuple(v)
