"""Spider-nest identities and the randomized PHAGE optimizer.

A spider nest on a set ``S`` of ``n >= 4`` qubits is a product of gadgets on all
subsets of size 1, 2, 3 and on ``S`` itself that multiplies to the identity.
The optimizer multiplies a homogeneous circuit by randomly placed copies of 64
fixed identities, keeping each product only if it lowers the T-count.

Because an odd coefficient stays odd under negation, ``c * J`` and ``c * J^-1``
always have the same T-count: it changes by ``t(J) - 2 * overlap``, where
``overlap`` counts the supports at which both ``c`` and ``J`` are odd.  The
optimizer only has to count overlaps, which vectorizes well.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .phasepoly import HomogeneousCircuit, compose, inverse, support

log = logging.getLogger(__name__)

DEFAULT_REPS = 20_000
# above this many qubits supports no longer fit a uint64 and the Python path runs
_VECTOR_LIMIT = 63


def nest(s: Iterable[int], n: int | None = None) -> HomogeneousCircuit:
    qs = sorted(set(s))
    m = len(qs)
    if m < 4:
        raise ValueError(f"a spider nest needs at least 4 qubits, got {m}")
    n = qs[-1] + 1 if n is None else n
    h = HomogeneousCircuit(n)
    one = (m - 2) * (m - 3) // 2
    two = -(m - 3)
    for size, k in ((1, one), (2, two), (3, 1)):
        if k % 8 == 0:
            continue
        for sub in itertools.combinations(qs, size):
            h.add(support(sub), k)
    h.add(support(qs), 7)
    return h


def nest_composite(s: Iterable[int], exponents: Sequence[int], n: int | None = None) -> HomogeneousCircuit:
    """Fused product of nest(S)^p0 and nest(S minus its j-th member)^pj, j = 1..5."""
    qs = sorted(set(s))
    if len(qs) != 5:
        raise ValueError("composite nests are defined on 5 qubits")
    p = tuple(int(b) for b in exponents)
    if len(p) != 6 or any(b not in (0, 1) for b in p) or not any(p):
        raise ValueError(f"exponents must be 6 bits, not all zero: {exponents!r}")
    n = qs[-1] + 1 if n is None else n
    h = HomogeneousCircuit(n)
    if p[0]:
        h = compose(h, nest(qs, n))
    for j in range(1, 6):
        if p[j]:
            h = compose(h, nest([q for q in qs if q != qs[j - 1]], n))
    return h


@dataclass(frozen=True)
class NestTemplate:
    arity: int
    coeffs: HomogeneousCircuit
    label: str

    def entries(self) -> list[tuple[int, int]]:
        return sorted(self.coeffs.coeffs.items())


def template_list() -> list[NestTemplate]:
    out = [NestTemplate(4, nest(range(4)), "F4")]
    for p in itertools.product((0, 1), repeat=6):
        if any(p):
            out.append(NestTemplate(5, nest_composite(range(5), p), "".join(map(str, p))))
    return out


def _relabel(mask: int, qubits: Sequence[int]) -> int:
    out = 0
    for i, q in enumerate(qubits):
        if mask >> i & 1:
            out |= 1 << q
    return out


def instantiate(t: NestTemplate, qubits: Sequence[int], n: int) -> HomogeneousCircuit:
    """Place a template on ``qubits`` (template qubit i goes to the i-th smallest)."""
    qs = sorted(qubits)
    if len(qs) != t.arity:
        raise ValueError(f"template needs {t.arity} qubits")
    h = HomogeneousCircuit(n)
    for m, k in t.coeffs:
        h.add(_relabel(m, qs), k)
    return h


def _overlap(c: HomogeneousCircuit, k: HomogeneousCircuit) -> int:
    return sum(1 for m, v in k.coeffs.items() if v & 1 and c.coeffs.get(m, 0) & 1)


def phage_singleton(c: HomogeneousCircuit, k: HomogeneousCircuit) -> HomogeneousCircuit:
    """Multiply ``c`` by the identity ``k`` or its inverse if that lowers the T-count.

    Both directions give the same T-count; the ``k^-1`` product is returned in
    that case.  Without a strict improvement ``c`` comes back unchanged.
    """
    if k.n != c.n:
        raise ValueError(f"identity acts on {k.n} qubits, circuit on {c.n}")
    tk = k.t_count()
    if 2 * _overlap(c, k) < tk:
        return c
    tc = c.t_count()
    best, best_t = c, tc
    for cand in (compose(c, inverse(k)), compose(c, k)):
        t = cand.t_count()
        if t < best_t:
            best, best_t = cand, t
    return best


def phage(c: HomogeneousCircuit, family: Iterable[HomogeneousCircuit]) -> HomogeneousCircuit:
    """Family version: apply the single member of ``family`` that helps most."""
    best, best_t = c, c.t_count()
    for k in family:
        cand = phage_singleton(c, k)
        t = cand.t_count()
        if t < best_t:
            best, best_t = cand, t
    return best


# ----------------------------------------------------------------------------
# randomized driver

@dataclass(frozen=True)
class OptimizerConfig:
    reps: int = DEFAULT_REPS
    seed: int = 0
    vectorized: bool = True

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


@dataclass
class OptimizeStats:
    t_initial: int
    t_final: int
    acceptances: int
    wall_seconds: float
    per_template: list[int] = field(default_factory=list)


def draw_subsets(rng: np.random.Generator, n: int, size: int, count: int) -> np.ndarray:
    """``count`` uniform random ``size``-subsets of range(n), each sorted ascending."""
    if n <= 64:
        # rank random keys; cheap when n is small and never rejects
        keys = rng.random((count, n))
        out = np.argpartition(keys, size - 1, axis=1)[:, :size] if size < n else np.argsort(keys, axis=1)
        out = np.sort(out[:, :size], axis=1)
        return out.astype(np.int64)
    out = np.empty((count, size), dtype=np.int64)
    todo = np.arange(count)
    while todo.size:
        cand = rng.integers(0, n, size=(todo.size, size))
        cand.sort(axis=1)
        ok = np.all(np.diff(cand, axis=1) > 0, axis=1)
        out[todo[ok]] = cand[ok]
        todo = todo[~ok]
    return out


def _odd_keys(c: HomogeneousCircuit) -> np.ndarray:
    return np.array(sorted(m for m, k in c.coeffs.items() if k & 1), dtype=np.uint64)


def _apply(c: HomogeneousCircuit, entries, qubits) -> None:
    for m, k in entries:
        c.add(_relabel(m, qubits), -k)


def _run_template_vec(c: HomogeneousCircuit, entries, arity: int, subsets: np.ndarray) -> int:
    odd = [m for m, k in entries if k & 1]
    t_j = len(odd)
    bitsel = np.array([[m >> i & 1 for m in odd] for i in range(arity)], dtype=np.uint64)
    vals = np.left_shift(np.uint64(1), subsets.astype(np.uint64))
    g = np.zeros((len(subsets), t_j), dtype=np.uint64)
    for i in range(arity):
        g |= vals[:, i:i + 1] * bitsel[i][None, :]
    accepted = 0
    start = 0
    while start < len(subsets):
        keys = _odd_keys(c)
        if 2 * len(keys) <= t_j:
            break
        block = g[start:]
        pos = np.searchsorted(keys, block)
        np.minimum(pos, len(keys) - 1, out=pos)
        overlap = (keys[pos] == block).sum(axis=1)
        hits = np.flatnonzero(2 * overlap > t_j)
        if hits.size == 0:
            break
        r = start + int(hits[0])
        _apply(c, entries, subsets[r].tolist())
        accepted += 1
        start = r + 1
    return accepted


def _run_template_py(c: HomogeneousCircuit, entries, arity: int, subsets: np.ndarray) -> int:
    odd = [m for m, k in entries if k & 1]
    t_j = len(odd)
    accepted = 0
    for row in subsets.tolist():
        coeffs = c.coeffs
        overlap = sum(1 for m in odd if coeffs.get(_relabel(m, row), 0) & 1)
        if 2 * overlap > t_j:
            _apply(c, entries, row)
            accepted += 1
    return accepted


def optimize(c: HomogeneousCircuit, cfg: OptimizerConfig = OptimizerConfig(),
             templates: list[NestTemplate] | None = None) -> tuple[HomogeneousCircuit, OptimizeStats]:
    """Randomized PHAGE over all templates, ``cfg.reps`` placements each."""
    if c.n < 4:
        raise ValueError(f"optimize needs at least 4 qubits, got {c.n}")
    t0 = time.perf_counter()
    templates = template_list() if templates is None else templates
    rng = cfg.rng()
    out = c.copy()
    t_init = out.t_count()
    use_vec = cfg.vectorized and c.n <= _VECTOR_LIMIT
    per = []
    for t in templates:
        if t.arity > c.n:
            per.append(0)
            continue
        subsets = draw_subsets(rng, c.n, t.arity, cfg.reps)
        run = _run_template_vec if use_vec else _run_template_py
        per.append(run(out, t.entries(), t.arity, subsets))
    stats = OptimizeStats(t_init, out.t_count(), sum(per), time.perf_counter() - t0, per)
    log.debug("optimize: T %d -> %d with %d acceptances", t_init, stats.t_final, stats.acceptances)
    return out, stats
