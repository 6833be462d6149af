"""Gate/circuit IR for reversible circuits.

Basis states are integers in which line 0 is the most significant bit, so on a
width-3 circuit the state ``0b110`` has lines 0 and 1 set.

Gates carry plain integer line indices; line names live on the circuit.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np


class Kind(str, Enum):
    X = "X"
    V = "V"
    VDAG = "VDAG"
    SWAP = "SWAP"
    FREDKIN = "FREDKIN"
    CATALOG = "CATALOG"


CLASSICAL_KINDS = frozenset({Kind.X, Kind.SWAP, Kind.FREDKIN, Kind.CATALOG})


class CircuitError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Gate:
    """One reversible primitive.

    ``controls`` are positive-polarity control lines.  ``targets`` holds one
    line for X/V/VDAG, the two exchanged lines for SWAP/FREDKIN, and the
    ordered operand lines for a CATALOG gate.
    """

    kind: Kind
    controls: tuple[int, ...]
    targets: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "controls", tuple(sorted(self.controls)))
        object.__setattr__(self, "targets", tuple(self.targets))

    @property
    def lines(self) -> frozenset[int]:
        return frozenset(self.controls) | frozenset(self.targets)

    @property
    def is_classical(self) -> bool:
        return self.kind in CLASSICAL_KINDS

    @property
    def label(self) -> str:
        """Short NCT-style label: N, C, T, V, V+, SWAP, F or the catalog name."""
        if self.kind is Kind.X:
            return {0: "N", 1: "C", 2: "T"}.get(len(self.controls), f"MCT{len(self.controls)}")
        if self.kind is Kind.V:
            return "V"
        if self.kind is Kind.VDAG:
            return "V+"
        if self.kind is Kind.SWAP:
            return "SWAP"
        if self.kind is Kind.FREDKIN:
            return "F"
        return self.name

    def inverse(self, registry=None) -> "Gate":
        if self.kind is Kind.V:
            return replace(self, kind=Kind.VDAG)
        if self.kind is Kind.VDAG:
            return replace(self, kind=Kind.V)
        if self.kind is Kind.CATALOG:
            if registry is None:
                from revseq.equivalence import default_registry

                registry = default_registry()
            inv = registry.inverse_name(self.name)
            if inv is None:
                raise CircuitError(f"catalog gate {self.name!r} has no registered inverse")
            return replace(self, name=inv)
        return self

    def relabel(self, mapping: Mapping[int, int]) -> "Gate":
        return Gate(
            self.kind,
            tuple(mapping[c] for c in self.controls),
            tuple(mapping[t] for t in self.targets),
            self.name,
        )

    def __str__(self) -> str:
        ctrl = ",".join(map(str, self.controls))
        tgt = ",".join(map(str, self.targets))
        return f"{self.label}({ctrl + ';' if ctrl else ''}{tgt})"


def N(t: int) -> Gate:
    return Gate(Kind.X, (), (t,))


def C(c: int, t: int) -> Gate:
    return Gate(Kind.X, (c,), (t,))


def T(c1: int, c2: int, t: int) -> Gate:
    return Gate(Kind.X, (c1, c2), (t,))


def MCT(controls: Iterable[int], t: int) -> Gate:
    return Gate(Kind.X, tuple(controls), (t,))


def V(c: int, t: int) -> Gate:
    return Gate(Kind.V, (c,), (t,))


def Vdag(c: int, t: int) -> Gate:
    return Gate(Kind.VDAG, (c,), (t,))


def SWAP(a: int, b: int) -> Gate:
    return Gate(Kind.SWAP, (), (a, b))


def FREDKIN(c: int, a: int, b: int) -> Gate:
    return Gate(Kind.FREDKIN, (c,), (a, b))


def CATALOG(name: str, *lines: int) -> Gate:
    return Gate(Kind.CATALOG, (), tuple(lines), name)


@dataclass(frozen=True)
class Permutation:
    """A bijection on ``range(2**n)``; ``map[x]`` is the image of ``x``."""

    n: int
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(v) for v in self.map))
        if len(self.map) != 1 << self.n:
            raise ValueError(f"permutation on {self.n} lines needs {1 << self.n} entries")
        if sorted(self.map) != list(range(1 << self.n)):
            raise ValueError("map is not a bijection")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(n, tuple(range(1 << n)))

    def __call__(self, x: int) -> int:
        return self.map[x]

    def then(self, other: "Permutation") -> "Permutation":
        """Apply ``self`` first, then ``other``."""
        return Permutation(self.n, tuple(other.map[v] for v in self.map))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.map)
        for x, y in enumerate(self.map):
            inv[y] = x
        return Permutation(self.n, tuple(inv))

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.map))


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()
    names: tuple[str, ...] = ()
    constants: tuple[tuple[int, int], ...] = ()
    garbage: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        names = tuple(self.names) or default_names(self.width)
        object.__setattr__(self, "names", names)
        consts = self.constants
        if isinstance(consts, Mapping):
            consts = consts.items()
        object.__setattr__(self, "constants", tuple(sorted((int(k), int(v)) for k, v in consts)))
        object.__setattr__(self, "garbage", frozenset(self.garbage))

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if self.width != other.width:
            raise CircuitError(f"width mismatch: {self.width} vs {other.width}")
        return replace(self, gates=self.gates + other.gates)

    @property
    def constant_map(self) -> dict[int, int]:
        return dict(self.constants)

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return replace(self, gates=tuple(gates))

    def line(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.label] = out.get(g.label, 0) + 1
        return out

    def __str__(self) -> str:
        return " ".join(str(g) for g in self.gates) or "<empty>"


def default_names(width: int) -> tuple[str, ...]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    if width <= len(letters):
        return tuple(letters[:width])
    return tuple(f"x{i}" for i in range(width))


def circuit(width: int, *gates: Gate, **kw) -> Circuit:
    return Circuit(width, tuple(gates), **kw)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    gate_index: int | None
    rule: str

    def __str__(self) -> str:
        where = "circuit" if self.gate_index is None else f"gate {self.gate_index}"
        return f"{where}: {self.rule}"


def validate_gate(g: Gate, width: int, index: int | None = None) -> list[Violation]:
    out = []
    lines = list(g.controls) + list(g.targets)
    if any(not 0 <= ln < width for ln in lines):
        out.append(Violation(index, "line out of range"))
    if set(g.controls) & set(g.targets):
        out.append(Violation(index, "control overlaps target"))
    if len(set(g.targets)) != len(g.targets) or len(set(g.controls)) != len(g.controls):
        out.append(Violation(index, "repeated line"))
    arity = {Kind.X: 1, Kind.V: 1, Kind.VDAG: 1, Kind.SWAP: 2, Kind.FREDKIN: 2}
    if g.kind in arity and len(g.targets) != arity[g.kind]:
        out.append(Violation(index, f"{g.kind.value} needs {arity[g.kind]} target line(s)"))
    if g.kind in (Kind.V, Kind.VDAG) and len(g.controls) > 1:
        out.append(Violation(index, "V/V+ takes at most one control"))
    if g.kind is Kind.SWAP and g.controls:
        out.append(Violation(index, "SWAP takes no controls (use FREDKIN)"))
    if g.kind is Kind.FREDKIN and len(g.controls) != 1:
        out.append(Violation(index, "FREDKIN takes exactly one control"))
    if g.kind is Kind.CATALOG:
        if not g.name:
            out.append(Violation(index, "catalog gate without a name"))
        if g.controls:
            out.append(Violation(index, "catalog gates list all operands as targets"))
    return out


def validate_circuit(c: Circuit) -> list[Violation]:
    """Return every invariant breach in ``c``; an empty list means valid."""
    out: list[Violation] = []
    if len(c.names) != c.width:
        out.append(Violation(None, "line-name count differs from width"))
    if len(set(c.names)) != len(c.names):
        out.append(Violation(None, "duplicate line name"))
    for ln, val in c.constants:
        if not 0 <= ln < c.width:
            out.append(Violation(None, f"constant on line {ln} out of range"))
        if val not in (0, 1):
            out.append(Violation(None, f"constant on line {ln} is not a bit"))
    for ln in c.garbage:
        if not 0 <= ln < c.width:
            out.append(Violation(None, f"garbage line {ln} out of range"))
    for i, g in enumerate(c.gates):
        out.extend(validate_gate(g, c.width, i))
    return out


def ensure_valid(c: Circuit) -> Circuit:
    problems = validate_circuit(c)
    if problems:
        raise CircuitError("; ".join(map(str, problems)))
    return c


# -- classical simulation -----------------------------------------------------


def _bit(n: int, line: int) -> int:
    return 1 << (n - 1 - line)


def _apply_classical(states: np.ndarray, g: Gate, n: int, registry=None) -> np.ndarray:
    if g.kind is Kind.CATALOG:
        if registry is None:
            from revseq.equivalence import default_registry

            registry = default_registry()
        table = np.asarray(registry.get(g.name).semantic_table.map, dtype=np.int64)
        k = len(g.targets)
        local = np.zeros_like(states)
        for j, ln in enumerate(g.targets):
            local |= ((states >> (n - 1 - ln)) & 1) << (k - 1 - j)
        image = table[local]
        out = states.copy()
        for j, ln in enumerate(g.targets):
            out &= ~_bit(n, ln)
            out |= ((image >> (k - 1 - j)) & 1) << (n - 1 - ln)
        return out
    ctrl_mask = 0
    for c in g.controls:
        ctrl_mask |= _bit(n, c)
    active = (states & ctrl_mask) == ctrl_mask
    if g.kind is Kind.X:
        return np.where(active, states ^ _bit(n, g.targets[0]), states)
    if g.kind in (Kind.SWAP, Kind.FREDKIN):
        a, b = (_bit(n, t) for t in g.targets)
        differ = ((states & a) == 0) != ((states & b) == 0)
        return np.where(active & differ, states ^ (a | b), states)
    raise CircuitError(f"{g.label} is not a classical gate; use revseq.unitary")


def simulate_states(c: Circuit, states: np.ndarray, registry=None) -> np.ndarray:
    out = np.asarray(states, dtype=np.int64)
    for g in c.gates:
        out = _apply_classical(out, g, c.width, registry)
    return out


def simulate_permutation(c: Circuit, registry=None) -> Permutation:
    """Composite bijection of a classical circuit, gates applied left to right."""
    for i, g in enumerate(c.gates):
        if not g.is_classical:
            raise CircuitError(f"gate {i} ({g}) is not classical; use revseq.unitary")
    ensure_valid(c)
    states = simulate_states(c, np.arange(1 << c.width, dtype=np.int64), registry)
    return Permutation(c.width, tuple(states.tolist()))


def apply_gate_to_state(g: Gate, state: int, n: int, registry=None) -> int:
    return int(_apply_classical(np.array([state], dtype=np.int64), g, n, registry)[0])


# -- algebra ------------------------------------------------------------------


def invert_circuit(c: Circuit, registry=None) -> Circuit:
    return replace(c, gates=tuple(g.inverse(registry) for g in reversed(c.gates)))


def relabel_circuit(c: Circuit, mapping: Sequence[int] | Mapping[int, int]) -> Circuit:
    """Move line ``i`` to ``mapping[i]``; names, constants and garbage follow."""
    m = dict(enumerate(mapping)) if not isinstance(mapping, Mapping) else dict(mapping)
    names = [""] * c.width
    for i, nm in enumerate(c.names):
        names[m[i]] = nm
    return Circuit(
        c.width,
        tuple(g.relabel(m) for g in c.gates),
        tuple(names),
        tuple((m[k], v) for k, v in c.constants),
        frozenset(m[k] for k in c.garbage),
    )
