import random

import numpy as np
import pytest

from spidernest import circuit as C
from spidernest.circuit import Circuit, Gate, gadget, gate
from spidernest.gadgetize import hadamard_gadget
from spidernest.nest import nest
from spidernest.phasepoly import HomogeneousCircuit, compose, support, synthesize
from spidernest.verify import (PostselectionError, VerificationLimitError, circuit_equiv_all_branches,
                               circuit_equiv_postselected, circuit_phase_polynomial, diag_equiv,
                               postselected_operator)

from helpers import random_circuit, unitary


def one(kind, *qs, n=None):
    n = n or max(qs) + 1
    return Circuit(n, n, (gate(kind, *qs),))


def test_diag_equiv_examples():
    h = HomogeneousCircuit(5, {support((0, 3)): 3, support((1,)): 1})
    assert diag_equiv(h, h).equivalent
    assert diag_equiv(h, compose(h, nest((0, 1, 3, 4), 5))).equivalent
    rep = diag_equiv(HomogeneousCircuit(1, {1: 1}), HomogeneousCircuit(1, {1: 2}))
    assert not rep and rep.basis_witness == (1,)


def test_diag_equiv_limit():
    with pytest.raises(VerificationLimitError):
        diag_equiv(HomogeneousCircuit(21), HomogeneousCircuit(21))


def test_h_gadget_equivalent_to_h():
    g = Circuit(1, 2, tuple(hadamard_gadget(0, 1, 0)), bit_count=1)
    rep = circuit_equiv_postselected(one(C.H, 0), g)
    assert rep.equivalent and rep.max_deviation < 1e-9
    assert circuit_equiv_all_branches(one(C.H, 0), g).equivalent


def test_ccnot_vs_h_ccz_h():
    a = one(C.CCNOT, 0, 1, 2)
    b = Circuit(3, 3, (gate(C.H, 2), gate(C.CCZ, 0, 1, 2), gate(C.H, 2)))
    assert circuit_equiv_postselected(a, b).equivalent


def test_t_vs_s_not_equivalent():
    rep = circuit_equiv_postselected(one(C.T, 0), one(C.S, 0))
    assert not rep.equivalent and rep.basis_witness is not None


def test_global_phase_ignored():
    # S = exp(i pi/4) Z^(1/2); X Z X = -Z
    a = Circuit(1, 1, (gate(C.X, 0), gate(C.Z, 0), gate(C.X, 0)))
    assert circuit_equiv_postselected(a, one(C.Z, 0)).equivalent


def test_limit_and_zero_norm():
    big = Circuit(13, 13)
    with pytest.raises(VerificationLimitError):
        circuit_equiv_postselected(big, big)
    # auxiliary left in |1> can never be post-selected onto |0>
    bad = Circuit(1, 2, (gate(C.X, 1),))
    with pytest.raises(PostselectionError):
        postselected_operator(bad)


def test_leaky_auxiliary_detected():
    # auxiliary left in |+>: half the weight is outside the kept branch
    leaky = Circuit(1, 2, (gate(C.H, 1),))
    rep = circuit_equiv_postselected(Circuit(1, 1), leaky)
    assert not rep.equivalent and rep.detail["aux_leakage"] == pytest.approx(1.0)


def test_matches_independent_oracle():
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(1, 4)
        a = random_circuit(rng, n, rng.randint(0, 12))
        b = random_circuit(rng, n, rng.randint(0, 12))
        m, _ = postselected_operator(a)
        ua = unitary(a)
        assert np.allclose(m, ua)
        same = circuit_equiv_postselected(a, b).equivalent
        ub = unitary(b)
        ph = np.vdot(ua, ub)
        want = abs(ph) > 1e-9 and np.allclose(ua * ph / abs(ph), ub, atol=1e-9)
        assert same == want
        assert circuit_equiv_postselected(a, a).equivalent
        assert circuit_equiv_postselected(a, b).equivalent == circuit_equiv_postselected(b, a).equivalent


def test_synthesized_agrees_with_diag_equiv():
    rng = random.Random(9)
    for _ in range(30):
        n = rng.randint(1, 5)
        items = [(rng.randrange(1, 2 ** n), rng.randrange(8)) for _ in range(rng.randint(0, 6))]
        h1 = HomogeneousCircuit(n, items)
        h2 = h1.copy()
        if rng.random() < 0.5:
            h2.add(rng.randrange(1, 2 ** n), rng.randrange(1, 8))
        full = circuit_equiv_postselected(synthesize(h1), synthesize(h2)).equivalent
        assert full == diag_equiv(h1, h2).equivalent


def test_conditioned_gates_follow_outcomes():
    # measuring |+> always gives 0, so the conditioned X must never fire on that branch
    c = Circuit(1, 2, (gate(C.PREP_PLUS, 1), gate(C.MEASX, 1, bit=0),
                       Gate(C.X, (0,), cond=frozenset({0}))), bit_count=1)
    m, _ = postselected_operator(c)
    assert np.allclose(m / np.linalg.norm(m) * np.sqrt(2), np.eye(2))
    with pytest.raises(PostselectionError):
        postselected_operator(c, {0: 1})


def test_circuit_phase_polynomial():
    h = HomogeneousCircuit(3, {support((0, 2)): 3, support((1,)): 6, support((0, 1, 2)): 1})
    assert circuit_phase_polynomial(synthesize(h)) == h
    c = Circuit(2, 2, (gate(C.X, 0), gate(C.T, 0), gate(C.X, 0)))
    assert diag_equiv(circuit_phase_polynomial(c), HomogeneousCircuit(2, {1: 7})).equivalent
    with pytest.raises(ValueError):
        circuit_phase_polynomial(one(C.CNOT, 0, 1))
