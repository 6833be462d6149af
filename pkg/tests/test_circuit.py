import random

import pytest
from hypothesis import given, settings

from conftest import naive_apply, naive_perm, nct_circuits, random_circuit
from revseq.circuit import (
    C,
    CATALOG,
    FREDKIN,
    MCT,
    N,
    SWAP,
    T,
    V,
    Circuit,
    CircuitError,
    Gate,
    Kind,
    Permutation,
    Vdag,
    invert_circuit,
    relabel_circuit,
    simulate_permutation,
    validate_circuit,
)


def test_gate_names_follow_control_count():
    assert N(0).label == "N"
    assert C(0, 1).label == "C"
    assert T(0, 1, 2).label == "T"


def test_controls_are_sorted_and_hashable():
    assert T(1, 0, 2) == T(0, 1, 2)
    assert len({T(1, 0, 2), T(0, 1, 2)}) == 1


def test_validate_ok():
    assert validate_circuit(Circuit(3, (T(0, 1, 2),))) == []


def test_validate_control_overlaps_target():
    bad = Gate(Kind.X, (1,), (1,))
    problems = validate_circuit(Circuit(3, (bad,)))
    assert len(problems) == 1
    assert problems[0].gate_index == 0
    assert "control overlaps target" in str(problems[0])


def test_validate_line_out_of_range():
    problems = validate_circuit(Circuit(3, (C(0, 5),)))
    assert any("line out of range" in str(p) for p in problems)


def test_validate_reports_every_bad_gate():
    c = Circuit(3, (N(0), C(0, 7), Gate(Kind.X, (2,), (2,))))
    assert sorted(p.gate_index for p in validate_circuit(c)) == [1, 2]


def test_validate_constants_and_garbage():
    c = Circuit(2, (), constants=((4, 0),), garbage=frozenset({9}))
    assert len(validate_circuit(c)) == 2


def test_not_on_one_line():
    assert simulate_permutation(Circuit(1, (N(0),))).map == (1, 0)


def test_toffoli_swaps_110_and_111():
    p = simulate_permutation(Circuit(3, (T(0, 1, 2),))).map
    assert p == (0, 1, 2, 3, 4, 5, 7, 6)


def test_ctc_equals_fredkin():
    ctc = Circuit(3, (C(2, 1), T(0, 1, 2), C(2, 1)))
    f = Circuit(3, (FREDKIN(0, 1, 2),))
    assert simulate_permutation(ctc) == simulate_permutation(f)


def test_line0_is_msb():
    # NOT on line 0 of width 3 flips the 4s bit
    assert simulate_permutation(Circuit(3, (N(0),))).map[0] == 4


def test_simulate_rejects_v():
    with pytest.raises(CircuitError):
        simulate_permutation(Circuit(2, (V(0, 1),)))


def test_simulate_rejects_invalid():
    with pytest.raises(CircuitError):
        simulate_permutation(Circuit(2, (C(0, 3),)))


def test_catalog_gate_simulates_through_registry():
    c = Circuit(3, (CATALOG("fredkin", 0, 1, 2),))
    assert simulate_permutation(c) == simulate_permutation(Circuit(3, (FREDKIN(0, 1, 2),)))


def test_invert_examples():
    assert invert_circuit(Circuit(2, (N(0), C(0, 1)))).gates == (C(0, 1), N(0))
    assert invert_circuit(Circuit(2, (V(0, 1),))).gates == (Vdag(0, 1),)


def test_invert_catalog_without_inverse_fails():
    with pytest.raises(CircuitError):
        invert_circuit(Circuit(3, (CATALOG("new-gate", 0, 1, 2),)))


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation(1, (0, 0))


def test_relabel_moves_lines():
    c = relabel_circuit(Circuit(3, (T(0, 1, 2),)), [2, 1, 0])
    assert c.gates == (T(2, 1, 0),)


@settings(max_examples=200, deadline=None)
@given(nct_circuits())
def test_simulation_matches_naive_oracle(c):
    assert list(simulate_permutation(c).map) == naive_perm(c)


@settings(max_examples=200, deadline=None)
@given(nct_circuits())
def test_inverse_composes_to_identity(c):
    p = simulate_permutation(c)
    q = simulate_permutation(invert_circuit(c))
    assert p.then(q).is_identity()


@settings(max_examples=100, deadline=None)
@given(nct_circuits())
def test_invert_is_involution(c):
    assert invert_circuit(invert_circuit(c)).gates == c.gates


@settings(max_examples=100, deadline=None)
@given(nct_circuits(min_width=2), nct_circuits(min_width=2))
def test_homomorphism(a, b):
    if a.width != b.width:
        b = Circuit(a.width, tuple(g for g in b.gates if max(g.lines) < a.width))
    pa, pb = simulate_permutation(a), simulate_permutation(b)
    assert simulate_permutation(a + b) == pa.then(pb)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_x_family_involutions_exhaustive(n):
    rng = random.Random(n)
    for _ in range(30):
        g = random_circuit(rng, n, 1).gates[0]
        for x in range(1 << n):
            assert naive_apply(g, naive_apply(g, x, n), n) == x
        assert simulate_permutation(Circuit(n, (g, g))).is_identity()


def test_swap_and_mct():
    assert simulate_permutation(Circuit(2, (SWAP(0, 1),))).map == (0, 2, 1, 3)
    p = simulate_permutation(Circuit(4, (MCT((0, 1, 2), 3),))).map
    assert p[14] == 15 and p[15] == 14 and sum(p[x] != x for x in range(16)) == 2
