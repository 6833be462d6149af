"""Truth-table handling and transformation-based NCT synthesis.

The synthesis routines repair the table one row at a time in index order.
A repair for row ``i`` flips bits of the current output word with X gates
whose control set is drawn from the 1-lines of that word.  A control set
``S`` leaves every earlier row alone exactly when ``mask(S) >= i``, because
``mask(S)`` is the smallest word containing ``S``.  Gates with at most two
controls are preferred; a wider gate is only emitted when no NCT choice is
safe, which can happen from four lines up.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from revseq.circuit import Circuit, Gate, Kind, MCT, Permutation


class NotReversible(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class InfeasibleEmbedding(ValueError):
    pass


@dataclass(frozen=True)
class TruthTable:
    """``rows[x]`` is the output word for input word ``x`` (line 0 = MSB)."""

    n_in: int
    n_out: int
    rows: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        if len(self.rows) != 1 << self.n_in:
            raise ValueError(f"expected {1 << self.n_in} rows, got {len(self.rows)}")
        if any(not 0 <= r < 1 << self.n_out for r in self.rows):
            raise ValueError("output word wider than n_out")

    @classmethod
    def from_permutation(cls, p: Permutation) -> "TruthTable":
        return cls(p.n, p.n, p.map)

    @classmethod
    def from_function(cls, n_in: int, n_out: int, fn: Callable[..., Sequence[int] | int]) -> "TruthTable":
        """Build a table from ``fn(*input_bits) -> output bits`` (MSB first)."""
        rows = []
        for x in range(1 << n_in):
            bits = [(x >> (n_in - 1 - i)) & 1 for i in range(n_in)]
            out = fn(*bits)
            if isinstance(out, int):
                out = (out,)
            word = 0
            for b in out:
                word = (word << 1) | (int(b) & 1)
            rows.append(word)
        return cls(n_in, n_out, tuple(rows))

    @property
    def is_reversible(self) -> bool:
        return self.n_in == self.n_out and check_bijective(self).ok

    def to_permutation(self) -> Permutation:
        if not self.is_reversible:
            raise NotReversible("table is not a bijection")
        return Permutation(self.n_in, self.rows)

    def inverse(self) -> "TruthTable":
        return TruthTable.from_permutation(self.to_permutation().inverse())


@dataclass(frozen=True)
class BijectivityResult:
    ok: bool
    pair: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_bijective(t: TruthTable) -> BijectivityResult:
    """Report whether the rows form a permutation, else the first colliding pair."""
    if t.n_in != t.n_out:
        raise ShapeMismatch(f"{t.n_in} inputs vs {t.n_out} outputs")
    seen: dict[int, int] = {}
    for x, y in enumerate(t.rows):
        if y in seen:
            return BijectivityResult(False, (seen[y], x))
        seen[y] = x
    return BijectivityResult(True)


def output_multiplicity(t: TruthTable) -> int:
    counts: dict[int, int] = {}
    for y in t.rows:
        counts[y] = counts.get(y, 0) + 1
    return max(counts.values())


def min_garbage(t: TruthTable) -> int:
    """ceil(log2 q), q = the largest number of inputs sharing one output pattern."""
    q = output_multiplicity(t)
    return (q - 1).bit_length()


# -- embedding ----------------------------------------------------------------


@dataclass(frozen=True)
class Embedding:
    source: TruthTable
    target: TruthTable
    constants: tuple[tuple[int, int], ...]
    garbage_lines: tuple[int, ...]
    output_line_map: tuple[int, ...]

    @property
    def width(self) -> int:
        return self.target.n_in

    @property
    def constant_lines(self) -> int:
        return len(self.constants)

    def restricted_rows(self) -> list[tuple[int, int]]:
        """``(source input, target output)`` for every input with constants applied."""
        w = self.width
        shift = w - self.source.n_in
        base = 0
        for line, val in self.constants:
            base |= val << (w - 1 - line)
        return [(x, self.target.rows[(x << shift) | base]) for x in range(1 << self.source.n_in)]

    def reproduces_source(self) -> bool:
        w = self.width
        for x, out in self.restricted_rows():
            word = 0
            for line in self.output_line_map:
                word = (word << 1) | ((out >> (w - 1 - line)) & 1)
            if word != self.source.rows[x]:
                return False
        return True


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _closest(free: set[int] | list[int], anchor: int) -> int:
    return min(free, key=lambda v: (_popcount(v ^ anchor), v))


def embed_truth_table(
    t: TruthTable, extra_lines: int = 0, constant_values: Sequence[int] | None = None
) -> Embedding:
    """Embed ``t`` into a reversible table with ``extra_lines`` constant inputs.

    Constant lines follow the source inputs.  Source outputs occupy the last
    ``n_out`` lines, garbage lines come first.  Garbage bits and unconstrained
    rows are filled greedily by smallest Hamming distance to the input word.
    """
    width = t.n_in + extra_lines
    need = min_garbage(t)
    garbage = width - t.n_out
    if extra_lines < 0 or garbage < need:
        raise InfeasibleEmbedding(
            f"{extra_lines} extra line(s) give {max(garbage, 0)} garbage output(s); "
            f"min_garbage is {need}"
        )
    if constant_values is None:
        constant_values = [0] * extra_lines
    if len(constant_values) != extra_lines:
        raise ValueError("one constant value per extra line")
    constants = tuple((t.n_in + j, int(v)) for j, v in enumerate(constant_values))
    base = 0
    for line, val in constants:
        base |= val << (width - 1 - line)

    rows: list[int | None] = [None] * (1 << width)
    used: set[int] = set()
    for x, y in enumerate(t.rows):
        inp = (x << extra_lines) | base
        candidates = [(g << t.n_out) | y for g in range(1 << garbage)]
        out = _closest([c for c in candidates if c not in used], inp)
        rows[inp] = out
        used.add(out)
    free = set(range(1 << width)) - used
    for inp in range(1 << width):
        if rows[inp] is None:
            out = _closest(free, inp)
            rows[inp] = out
            free.discard(out)
    target = TruthTable(width, width, tuple(rows))
    return Embedding(
        source=t,
        target=target,
        constants=constants,
        garbage_lines=tuple(range(garbage)),
        output_line_map=tuple(range(garbage, width)),
    )


# -- transformation-based synthesis -------------------------------------------

ChoiceOrder = str
CHOICE_ORDERS = ("low-first", "high-first")


def _mask(lines: Iterable[int], n: int) -> int:
    m = 0
    for ln in lines:
        m |= 1 << (n - 1 - ln)
    return m


def _ones(word: int, n: int) -> list[int]:
    return [ln for ln in range(n) if (word >> (n - 1 - ln)) & 1]


def _pick_controls(y: int, t: int, row: int, n: int, order: ChoiceOrder) -> tuple[int, ...]:
    pool = [ln for ln in _ones(y, n) if ln != t]
    if order == "high-first":
        pool = pool[::-1]
    for size in (0, 1, 2):
        for combo in combinations(pool, size):
            if _mask(combo, n) >= row:
                return tuple(combo)
    return tuple(pool)


def _repair_row(y: int, row: int, n: int, order: ChoiceOrder) -> list[Gate]:
    """Gates mapping word ``y`` to ``row`` while fixing every word below ``row``."""
    gates = []
    lines = list(range(n)) if order == "low-first" else list(range(n))[::-1]
    for want in (1, 0):
        for t in lines:
            bit = 1 << (n - 1 - t)
            if bool(row & bit) == bool(want) and bool(y & bit) != bool(want):
                ctrl = _pick_controls(y, t, row, n, order)
                gates.append(MCT(ctrl, t))
                y ^= bit
    assert y == row
    return gates


def _apply_to_words(words: np.ndarray, g: Gate, n: int) -> np.ndarray:
    m = _mask(g.controls, n)
    return np.where((words & m) == m, words ^ (1 << (n - 1 - g.targets[0])), words)


def _require_reversible(t: TruthTable) -> Permutation:
    if t.n_in != t.n_out:
        raise NotReversible(f"{t.n_in} inputs vs {t.n_out} outputs; embed first")
    res = check_bijective(t)
    if not res:
        raise NotReversible(f"rows {res.pair} share an output word")
    return Permutation(t.n_in, t.rows)


def synthesize_basic(t: TruthTable, order: ChoiceOrder = "low-first") -> Circuit:
    p = _require_reversible(t)
    n = p.n
    f = np.asarray(p.map, dtype=np.int64)
    out_side: list[Gate] = []
    for row in range(1 << n):
        y = int(f[row])
        if y == row:
            continue
        for g in _repair_row(y, row, n, order):
            f = _apply_to_words(f, g, n)
            out_side.append(g)
    return Circuit(n, tuple(reversed(out_side)))


def synthesize_bidirectional(t: TruthTable, order: ChoiceOrder = "low-first") -> Circuit:
    """Per row, repair from whichever side needs fewer bit flips.

    Output-side gates act on ``f``'s image; input-side gates act on ``f``'s
    inverse.  The emitted circuit is the input-side gates in order followed by
    the output-side gates reversed.  The per-row choice is greedy and loses
    to the one-sided scan on a few percent of tables, so the one-sided result
    is returned whenever it is strictly shorter.
    """
    two_sided = bidirectional_raw(t, order)
    one_sided = synthesize_basic(t, order)
    return one_sided if len(one_sided) < len(two_sided) else two_sided


def bidirectional_raw(t: TruthTable, order: ChoiceOrder = "low-first") -> Circuit:
    """The per-row greedy two-sided scan, without the fallback."""
    p = _require_reversible(t)
    n = p.n
    f = np.asarray(p.map, dtype=np.int64)
    finv = np.asarray(p.inverse().map, dtype=np.int64)
    out_side: list[Gate] = []
    in_side: list[Gate] = []
    for row in range(1 << n):
        y = int(f[row])
        if y == row:
            continue
        x = int(finv[row])
        if _popcount(x ^ row) < _popcount(y ^ row):
            for g in _repair_row(x, row, n, order):
                finv = _apply_to_words(finv, g, n)
                in_side.append(g)
            f = np.empty_like(finv)
            f[finv] = np.arange(1 << n)
        else:
            for g in _repair_row(y, row, n, order):
                f = _apply_to_words(f, g, n)
                out_side.append(g)
            finv = np.empty_like(f)
            finv[f] = np.arange(1 << n)
    return Circuit(n, tuple(in_side) + tuple(reversed(out_side)))


# -- the select-by-quantum-cost driver ----------------------------------------

ALGORITHMS: dict[str, Callable[[TruthTable, ChoiceOrder], Circuit]] = {
    "basic": synthesize_basic,
    "bidirectional": synthesize_bidirectional,
}


@dataclass(frozen=True)
class SynthConfig:
    algorithms: tuple[str, ...] = ("basic", "bidirectional")
    orders: tuple[ChoiceOrder, ...] = CHOICE_ORDERS
    optimize: bool = True
    extra_lines: int = 0
    constant_values: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Candidate:
    algorithm: str
    order: ChoiceOrder
    raw: Circuit
    circuit: Circuit
    quantum_cost: int


@dataclass
class PipelineResult:
    circuit: Circuit
    report: "object"
    candidates: list[Candidate] = field(default_factory=list)
    embedding: Embedding | None = None

    def __iter__(self):
        return iter((self.circuit, self.report))


def _gate_sort_key(c: Circuit):
    return tuple((g.kind.value, g.controls, g.targets, g.name) for g in c.gates)


def synth_pipeline(t: TruthTable, config: SynthConfig = SynthConfig()) -> PipelineResult:
    """Run every configured algorithm/order, optimize, keep the cheapest by QC.

    Ties fall to NCT gate count, then to the lexicographically smallest gate
    list, so the choice does not depend on evaluation order.
    """
    from revseq.optimizer import optimize
    from revseq.qcost import cost_report, quantum_cost

    embedding = None
    if t.n_in != t.n_out or not check_bijective(t):
        embedding = embed_truth_table(t, config.extra_lines, config.constant_values)
        t = embedding.target
    candidates = []
    for algo in config.algorithms:
        for order in config.orders:
            raw = ALGORITHMS[algo](t, order)
            opt = optimize(raw)[0] if config.optimize else raw
            candidates.append(Candidate(algo, order, raw, opt, quantum_cost(opt).cost))
    best = min(candidates, key=lambda c: (c.quantum_cost, len(c.circuit), _gate_sort_key(c.circuit)))
    chosen = best.circuit
    if embedding is not None:
        chosen = Circuit(
            chosen.width,
            chosen.gates,
            constants=embedding.constants,
            garbage=frozenset(embedding.garbage_lines),
        )
    return PipelineResult(chosen, cost_report(chosen), candidates, embedding)


def uses_only_nct(c: Circuit) -> bool:
    return all(g.kind is Kind.X and len(g.controls) <= 2 for g in c.gates)
