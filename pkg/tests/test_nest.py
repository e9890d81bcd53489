import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spidernest.nest import (NestTemplate, OptimizerConfig, draw_subsets, instantiate, nest,
                             nest_composite, optimize, phage, phage_singleton, template_list)
from spidernest.phasepoly import (HomogeneousCircuit, compose, inverse, is_identity, phase_table,
                                  support)


def by_size(h):
    out = {}
    for m, k in h:
        out.setdefault(bin(m).count("1"), set()).add(k)
    return out


def test_nest_on_four():
    h = nest({0, 1, 2, 3})
    assert by_size(h) == {1: {1}, 2: {7}, 3: {1}, 4: {7}}
    assert len(h) == 15 and h.t_count() == 15
    assert is_identity(h)


@pytest.mark.parametrize("m", range(4, 11))
def test_nest_is_identity(m):
    assert is_identity(nest(range(m)))


def test_nest_embedding_and_errors():
    h = nest([1, 3, 4, 6], n=8)
    assert h.n == 8 and all(m & ~support([1, 3, 4, 6]) == 0 for m, _ in h)
    assert is_identity(h)
    with pytest.raises(ValueError):
        nest([0, 1, 2])


def test_composite_examples():
    assert nest_composite(range(5), (1, 0, 0, 0, 0, 0)) == nest(range(5))
    assert nest_composite(range(5), (1, 1, 0, 0, 0, 0)).t_count() == 15
    for bad in [(0,) * 6, (1, 0, 0), (2, 0, 0, 0, 0, 0)]:
        with pytest.raises(ValueError):
            nest_composite(range(5), bad)
    with pytest.raises(ValueError):
        nest_composite(range(4), (1, 0, 0, 0, 0, 0))


def test_template_list():
    ts = template_list()
    assert len(ts) == 64
    assert ts[0].arity == 4 and all(t.arity == 5 for t in ts[1:])
    assert len({t.label for t in ts}) == 64
    assert len({tuple(t.entries()) for t in ts[1:]}) == 63
    # dropping qubit 4 from the 5-set gives F4 back, embedded in 5 qubits
    last = next(t for t in ts if t.label == "000001")
    assert last.entries() == ts[0].entries()
    for t in ts:
        assert t.coeffs.n == t.arity and is_identity(t.coeffs)


def test_instantiate_maps_ascending():
    t = template_list()[0]
    h = instantiate(t, [6, 2, 5, 0], 7)
    assert h == nest([0, 2, 5, 6], n=7)
    with pytest.raises(ValueError):
        instantiate(t, [0, 1, 2], 7)


def test_phage_singleton_examples():
    n4 = nest(range(4))
    assert len(phage_singleton(n4, n4)) == 0
    lone = HomogeneousCircuit(4, {support(range(4)): 7})
    assert phage_singleton(lone, n4) == lone
    with pytest.raises(ValueError):
        phage_singleton(HomogeneousCircuit(5), n4)


def test_phage_singleton_strictness():
    # pairs at 3 instead of 7: both candidates still differ in phase only on even terms
    c = nest(range(4))
    for m, k in list(c):
        if bin(m).count("1") == 2:
            c.coeffs[m] = 3
    k = nest(range(4))
    got = phage_singleton(c, k)
    cands = [compose(c, inverse(k)), compose(c, k)]
    best = min(x.t_count() for x in cands)
    if best < c.t_count():
        assert got.t_count() == best
        assert got == cands[0] or got == cands[1]
    else:
        assert got is c
    assert (phase_table(got) == phase_table(c)).all()


def test_phage_family_picks_best():
    n = 5
    c = HomogeneousCircuit(n)
    for m, k in nest(range(4), n=n):
        c.add(m, k)
    c.add(support([4]), 1)
    fam = [nest([0, 1, 2, 4], n=n), nest(range(4), n=n)]
    assert phage(c, fam).t_count() == 1


@given(st.integers(4, 20), st.integers(1, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_draw_subsets(n, size, seed):
    size = min(size, n)
    rng = np.random.Generator(np.random.PCG64(seed))
    out = draw_subsets(rng, n, size, 30)
    assert out.shape == (30, size)
    assert (out >= 0).all() and (out < n).all()
    assert (np.diff(out, axis=1) > 0).all()


def test_draw_subsets_wide():
    rng = np.random.Generator(np.random.PCG64(1))
    out = draw_subsets(rng, 100, 5, 50)
    assert (np.diff(out, axis=1) > 0).all() and out.max() < 100


def test_draw_subsets_roughly_uniform():
    rng = np.random.Generator(np.random.PCG64(7))
    out = draw_subsets(rng, 6, 4, 15000)
    counts = {}
    for row in map(tuple, out):
        counts[row] = counts.get(row, 0) + 1
    assert len(counts) == 15
    assert max(counts.values()) / min(counts.values()) < 1.3


def test_optimize_removes_embedded_nest():
    c = nest([1, 3, 4, 6], n=8)
    out, stats = optimize(c, OptimizerConfig(reps=20000, seed=3))
    assert out.t_count() == 0 and stats.t_initial == 15 and stats.t_final == 0
    assert stats.acceptances >= 1 and len(stats.per_template) == 64


def test_optimize_empty_and_small():
    out, stats = optimize(HomogeneousCircuit(6), OptimizerConfig(reps=50))
    assert len(out) == 0 and stats.acceptances == 0
    with pytest.raises(ValueError):
        optimize(HomogeneousCircuit(3))
    with pytest.raises(ValueError):
        OptimizerConfig(reps=0)
    # only the arity-4 template can run on four qubits
    out, stats = optimize(nest(range(4)), OptimizerConfig(reps=10))
    assert out.t_count() == 0 and stats.per_template[1:] == [0] * 63


def _random_phi(rng, n, count):
    h = HomogeneousCircuit(n)
    for _ in range(count):
        size = rng.randint(1, min(4, n))
        h.add(support(rng.sample(range(n), size)), rng.randrange(1, 8))
    return h


def _seeded(n, seed):
    rng = random.Random(seed)
    h = _random_phi(rng, n, 30)
    # bury a few nests so there is something to find
    for _ in range(3):
        h = compose(h, inverse(nest(rng.sample(range(n), rng.choice((4, 5))), n=n)))
    return h


@pytest.mark.parametrize("n, seed", [(5, 0), (6, 1), (8, 2), (10, 3)])
def test_optimize_preserves_semantics(n, seed):
    h = _seeded(n, seed)
    out, stats = optimize(h, OptimizerConfig(reps=500, seed=seed))
    assert stats.t_final == out.t_count() <= stats.t_initial == h.t_count()
    assert is_identity(compose(h, inverse(out)))
    assert h == _seeded(n, seed)


@pytest.mark.parametrize("n, seed", [(5, 4), (7, 5), (9, 6)])
def test_vector_and_python_paths_agree(n, seed):
    h = _seeded(n, seed)
    a, sa = optimize(h, OptimizerConfig(reps=300, seed=seed, vectorized=True))
    b, sb = optimize(h, OptimizerConfig(reps=300, seed=seed, vectorized=False))
    assert a == b and sa.per_template == sb.per_template


def test_optimize_deterministic():
    h = _seeded(7, 11)
    runs = [optimize(h, OptimizerConfig(reps=400, seed=9)) for _ in range(2)]
    assert runs[0][0] == runs[1][0]
    assert runs[0][1].per_template == runs[1][1].per_template
    other, _ = optimize(h, OptimizerConfig(reps=400, seed=10))
    assert is_identity(compose(other, inverse(runs[0][0])))


def test_optimize_custom_templates():
    t = NestTemplate(4, nest(range(4)), "F4")
    out, stats = optimize(nest([0, 2, 3, 4], n=5), OptimizerConfig(reps=200), templates=[t])
    assert out.t_count() == 0 and len(stats.per_template) == 1
