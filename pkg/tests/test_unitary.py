import numpy as np
import pytest
from hypothesis import given, settings

from conftest import float_unitary, naive_perm, ncv_circuits, nct_circuits
from revseq.circuit import C, FREDKIN, N, T, V, Circuit, Vdag, invert_circuit
from revseq.unitary import (
    ExactUnitary,
    GScalar,
    circuit_unitary,
    gate_unitary,
    unitary_equivalent,
)


def test_gscalar_canonical():
    assert GScalar(2, 4, 1) == GScalar(1, 2, 0)
    assert GScalar(1, 1, 1) * GScalar(1, 1, 1) == GScalar(0, 1, 1)  # ((1+i)/2)^2 = i/2


def test_gscalar_arithmetic_matches_complex():
    a, b = GScalar(3, -1, 2), GScalar(-5, 7, 3)
    for got, want in ((a + b, complex(a) + complex(b)), (a * b, complex(a) * complex(b)), (a - b, complex(a) - complex(b))):
        assert complex(got) == pytest.approx(want)
    assert complex(a.conjugate()) == complex(a).conjugate()


def test_not_matrix():
    u = gate_unitary(N(0), 1)
    assert np.array_equal(u.to_complex(), np.array([[0, 1], [1, 0]]))


def test_uncontrolled_v_identities():
    from revseq.circuit import Gate, Kind

    v, vd = Gate(Kind.V, (), (0,)), Gate(Kind.VDAG, (), (0,))
    x = gate_unitary(N(0), 1)
    assert circuit_unitary(Circuit(1, (v, v))) == x
    assert circuit_unitary(Circuit(1, (v, vd))).is_identity()
    assert circuit_unitary(Circuit(1, (vd, vd))) == x


def test_v_entries():
    from revseq.circuit import Gate, Kind

    u = gate_unitary(Gate(Kind.V, (), (0,)), 1).to_complex()
    assert np.allclose(u, 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]))


def test_empty_circuit_is_identity():
    assert circuit_unitary(Circuit(2, ())) == ExactUnitary.identity(2)


def test_controlled_v_pair_is_cnot():
    assert unitary_equivalent(Circuit(2, (V(0, 1), V(0, 1))), Circuit(2, (C(0, 1),)))


def test_toffoli_decomposition():
    ncv = Circuit(3, (V(1, 2), C(0, 1), Vdag(1, 2), C(0, 1), V(0, 2)))
    assert unitary_equivalent(ncv, Circuit(3, (T(0, 1, 2),)))


def test_fredkin_forms_equivalent():
    three = Circuit(3, (T(0, 1, 2), T(0, 2, 1), T(0, 1, 2)))
    ctc = Circuit(3, (C(2, 1), T(0, 1, 2), C(2, 1)))
    assert unitary_equivalent(three, ctc)
    assert unitary_equivalent(ctc, Circuit(3, (FREDKIN(0, 1, 2),)))


def test_width_mismatch():
    with pytest.raises(ValueError):
        unitary_equivalent(Circuit(1, (N(0),)), Circuit(2, (C(0, 1),)))


def test_width_cap():
    with pytest.raises(ValueError):
        circuit_unitary(Circuit(9, ()))
    assert circuit_unitary(Circuit(3, ()), cap=3).is_identity()


def test_no_global_phase_allowance():
    # V.V+ on different control lines is not the identity
    assert not unitary_equivalent(Circuit(3, (V(0, 2), Vdag(1, 2))), Circuit(3, ()))


@settings(max_examples=60, deadline=None)
@given(ncv_circuits())
def test_matches_float_oracle_and_unitary(c):
    u = circuit_unitary(c)
    assert np.allclose(u.to_complex(), float_unitary(c))
    assert u.is_unitary()
    assert (u @ u.dagger()).is_identity()


@settings(max_examples=60, deadline=None)
@given(nct_circuits())
def test_classical_unitary_is_permutation_matrix(c):
    u = circuit_unitary(c)
    assert u.is_permutation()
    assert u == ExactUnitary.from_permutation(c.width, naive_perm(c))


@settings(max_examples=60, deadline=None)
@given(ncv_circuits())
def test_double_inversion(c):
    assert unitary_equivalent(c, invert_circuit(invert_circuit(c)))


def test_long_product_stays_exact():
    # 40 V gates: denominators grow, must still close to X^20 = I exactly
    c = Circuit(2, (V(0, 1),) * 40)
    assert circuit_unitary(c).is_identity()
