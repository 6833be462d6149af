"""Exact unitary semantics for NCV circuits.

Every entry of an NCV circuit's matrix has the form ``(a + b*i) / 2**k`` with
integer ``a``, ``b``.  A matrix is stored as two integer arrays sharing one
exponent, always reduced so that ``k`` is minimal.  Equality is therefore
plain array comparison; there is no floating point anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from revseq.circuit import Circuit, CircuitError, Gate, Kind, simulate_states

DEFAULT_WIDTH_CAP = 8
_INT64_SAFE_K = 28


@dataclass(frozen=True)
class GScalar:
    """``(re + i*im) / 2**k`` in lowest terms."""

    re: int
    im: int
    k: int = 0

    def __post_init__(self):
        re, im, k = int(self.re), int(self.im), int(self.k)
        if k < 0:
            raise ValueError("k must be non-negative")
        if re == 0 and im == 0:
            k = 0
        while k > 0 and re % 2 == 0 and im % 2 == 0:
            re //= 2
            im //= 2
            k -= 1
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "k", k)

    def __add__(self, other: "GScalar") -> "GScalar":
        k = max(self.k, other.k)
        s, o = 1 << (k - self.k), 1 << (k - other.k)
        return GScalar(self.re * s + other.re * o, self.im * s + other.im * o, k)

    def __neg__(self) -> "GScalar":
        return GScalar(-self.re, -self.im, self.k)

    def __sub__(self, other: "GScalar") -> "GScalar":
        return self + (-other)

    def __mul__(self, other: "GScalar") -> "GScalar":
        return GScalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
            self.k + other.k,
        )

    def conjugate(self) -> "GScalar":
        return GScalar(self.re, -self.im, self.k)

    def __complex__(self) -> complex:
        return complex(self.re, self.im) / (1 << self.k)

    def __str__(self) -> str:
        num = f"{self.re}{self.im:+d}i" if self.im else str(self.re)
        return num if self.k == 0 else f"({num})/{1 << self.k}"


def _canonical(re: np.ndarray, im: np.ndarray, k: int):
    if not (re.any() or im.any()):
        return re, im, 0
    while k > 0 and not (re % 2).any() and not (im % 2).any():
        re = re // 2
        im = im // 2
        k -= 1
    if k > _INT64_SAFE_K and re.dtype != object:
        re, im = re.astype(object), im.astype(object)
    return re, im, k


class ExactUnitary:
    """A ``2**n x 2**n`` matrix over ``Z[i][1/2]``, immutable by convention."""

    __slots__ = ("n", "re", "im", "k", "_key")

    def __init__(self, n: int, re: np.ndarray, im: np.ndarray, k: int = 0):
        re, im, k = _canonical(np.asarray(re), np.asarray(im), int(k))
        self.n = n
        self.re = re
        self.im = im
        self.k = k
        self._key = None

    @classmethod
    def identity(cls, n: int) -> "ExactUnitary":
        dim = 1 << n
        return cls(n, np.eye(dim, dtype=np.int64), np.zeros((dim, dim), dtype=np.int64))

    @classmethod
    def from_permutation(cls, n: int, perm) -> "ExactUnitary":
        dim = 1 << n
        re = np.zeros((dim, dim), dtype=np.int64)
        re[np.asarray(perm, dtype=np.int64), np.arange(dim)] = 1
        return cls(n, re, np.zeros_like(re))

    @property
    def dim(self) -> int:
        return 1 << self.n

    def entry(self, row: int, col: int) -> GScalar:
        return GScalar(int(self.re[row, col]), int(self.im[row, col]), self.k)

    def key(self):
        if self._key is None:
            self._key = (self.n, self.k, self.re.tobytes() if self.re.dtype != object else tuple(self.re.flat),
                         self.im.tobytes() if self.im.dtype != object else tuple(self.im.flat))
        return self._key

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactUnitary):
            return NotImplemented
        return (
            self.n == other.n
            and self.k == other.k
            and np.array_equal(self.re, other.re)
            and np.array_equal(self.im, other.im)
        )

    def __hash__(self):
        return hash(self.key())

    def __matmul__(self, other: "ExactUnitary") -> "ExactUnitary":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        a_re, a_im, b_re, b_im = self.re, self.im, other.re, other.im
        if (a_re.dtype == object) != (b_re.dtype == object):
            a_re, a_im, b_re, b_im = (x.astype(object) for x in (a_re, a_im, b_re, b_im))
        elif self.k + other.k + self.n > 60 and a_re.dtype != object:
            a_re, a_im, b_re, b_im = (x.astype(object) for x in (a_re, a_im, b_re, b_im))
        re = a_re @ b_re - a_im @ b_im
        im = a_re @ b_im + a_im @ b_re
        return ExactUnitary(self.n, re, im, self.k + other.k)

    def dagger(self) -> "ExactUnitary":
        return ExactUnitary(self.n, self.re.T.copy(), -self.im.T, self.k)

    def is_identity(self) -> bool:
        return self == ExactUnitary.identity(self.n)

    def is_unitary(self) -> bool:
        return (self @ self.dagger()).is_identity()

    def is_permutation(self) -> bool:
        return self.k == 0 and not self.im.any() and set(np.unique(self.re)) <= {0, 1}

    def to_complex(self) -> np.ndarray:
        return (self.re.astype(float) + 1j * self.im.astype(float)) / float(1 << self.k)

    def __repr__(self) -> str:
        return f"ExactUnitary(n={self.n}, k={self.k})"

    # Left-multiplication by one gate.
    def apply(self, g: Gate, registry=None) -> "ExactUnitary":
        n = self.n
        if g.is_classical:
            perm = simulate_states(Circuit(n, (g,)), np.arange(1 << n, dtype=np.int64), registry)
            re = np.empty_like(self.re)
            im = np.empty_like(self.im)
            re[perm] = self.re
            im[perm] = self.im
            return ExactUnitary(n, re, im, self.k)
        rows0, rows1 = _controlled_rows(n, g.controls, g.targets[0])
        re, im = self.re.copy(), self.im.copy()
        ar, ai = self.re[rows0], self.im[rows0]
        br, bi = self.re[rows1], self.im[rows1]
        # V   = 1/2 [[1+i, 1-i], [1-i, 1+i]]
        # V+  = 1/2 [[1-i, 1+i], [1+i, 1-i]]
        s = 1 if g.kind is Kind.V else -1
        re *= 2
        im *= 2
        re[rows0] = (ar - s * ai) + (br + s * bi)
        im[rows0] = (ai + s * ar) + (bi - s * br)
        re[rows1] = (ar + s * ai) + (br - s * bi)
        im[rows1] = (ai - s * ar) + (bi + s * br)
        return ExactUnitary(n, re, im, self.k + 1)


@lru_cache(maxsize=4096)
def _controlled_rows(n: int, controls: tuple[int, ...], target: int):
    idx = np.arange(1 << n, dtype=np.int64)
    mask = 0
    for c in controls:
        mask |= 1 << (n - 1 - c)
    tbit = 1 << (n - 1 - target)
    rows0 = idx[((idx & mask) == mask) & ((idx & tbit) == 0)]
    return rows0, rows0 | tbit


def gate_unitary(g: Gate, n: int, registry=None) -> ExactUnitary:
    from revseq.circuit import validate_gate

    problems = validate_gate(g, n)
    if problems:
        raise CircuitError("; ".join(map(str, problems)))
    return ExactUnitary.identity(n).apply(g, registry)


def circuit_unitary(c: Circuit, cap: int = DEFAULT_WIDTH_CAP, registry=None) -> ExactUnitary:
    """Product of the gate matrices, first gate rightmost."""
    if c.width > cap:
        raise ValueError(f"width {c.width} exceeds the exact-unitary cap of {cap} lines")
    u = ExactUnitary.identity(c.width)
    for g in c.gates:
        u = u.apply(g, registry)
    return u


def unitary_equivalent(a: Circuit, b: Circuit, cap: int = DEFAULT_WIDTH_CAP, registry=None) -> bool:
    """Exact entrywise equality; global phase is not factored out."""
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    return circuit_unitary(a, cap, registry) == circuit_unitary(b, cap, registry)
