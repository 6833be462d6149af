"""Shared strategies and independent oracles.

The oracles here are deliberately naive (per-bit loops, floating-point
matrices) so that they do not share code paths with the library.
"""
import random

import numpy as np
import pytest
from hypothesis import strategies as st

from revseq.circuit import C, Circuit, Gate, Kind, MCT, N, T, V, Vdag


def bit(x, n, line):
    return (x >> (n - 1 - line)) & 1


def naive_apply(gate, x, n):
    """Classical action of an X/SWAP/FREDKIN gate on one basis word."""
    if not all(bit(x, n, c) for c in gate.controls):
        return x
    if gate.kind is Kind.X:
        return x ^ (1 << (n - 1 - gate.targets[0]))
    a, b = gate.targets
    if bit(x, n, a) != bit(x, n, b):
        x ^= (1 << (n - 1 - a)) | (1 << (n - 1 - b))
    return x


def naive_perm(c):
    out = []
    for x in range(1 << c.width):
        for g in c.gates:
            x = naive_apply(g, x, c.width)
        out.append(x)
    return out


_V = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])


def float_unitary(c):
    """Dense complex unitary built column by column with kron-free indexing."""
    n = c.width
    dim = 1 << n
    u = np.eye(dim, dtype=complex)
    for g in c.gates:
        m = np.zeros((dim, dim), dtype=complex)
        for x in range(dim):
            if g.kind in (Kind.V, Kind.VDAG) and all(bit(x, n, k) for k in g.controls):
                t = g.targets[0]
                blk = _V if g.kind is Kind.V else _V.conj().T
                b = bit(x, n, t)
                for nb in (0, 1):
                    y = x ^ ((b ^ nb) << (n - 1 - t))
                    m[y, x] += blk[nb, b]
            elif g.kind in (Kind.V, Kind.VDAG):
                m[x, x] = 1
            else:
                m[naive_apply(g, x, n), x] = 1
        u = m @ u
    return u


def random_gate(rng, n, kinds=("N", "C", "T")):
    kind = rng.choice([k for k in kinds if {"N": 1, "C": 2, "T": 3, "V": 2}[k] <= n])
    lines = rng.sample(range(n), {"N": 1, "C": 2, "T": 3, "V": 2}[kind])
    if kind == "N":
        return N(lines[0])
    if kind == "C":
        return C(*lines)
    if kind == "T":
        return T(*lines)
    return (V if rng.random() < 0.5 else Vdag)(*lines)


def random_circuit(rng, n, length, kinds=("N", "C", "T")):
    return Circuit(n, tuple(random_gate(rng, n, kinds) for _ in range(length)))


@st.composite
def nct_circuits(draw, min_width=1, max_width=4, max_len=12):
    n = draw(st.integers(min_width, max_width))
    seed = draw(st.integers(0, 2**32 - 1))
    length = draw(st.integers(0, max_len))
    return random_circuit(random.Random(seed), n, length)


@st.composite
def ncv_circuits(draw, min_width=2, max_width=4, max_len=10):
    n = draw(st.integers(min_width, max_width))
    seed = draw(st.integers(0, 2**32 - 1))
    length = draw(st.integers(0, max_len))
    return random_circuit(random.Random(seed), n, length, kinds=("N", "C", "T", "V"))


@pytest.fixture
def rng():
    return random.Random(20261017)
