"""Spatial-feedback circuits: unrolling, stepwise simulation and latch checks.

A feedback pair ``(out, in)`` wires output line ``out`` of one evaluation of
the core to input line ``in`` of the next.  The loop lives in space, so the
behavior over ``k`` clock steps is exactly ``k`` cascaded copies of the core.

Line roles in a core:

* state lines   - the ``in`` side of each feedback pair;
* constant lines - ``core.constants``, refreshed on every step;
* free inputs   - everything else, in line-index order.

Conventions: a *latch* is unclocked, a *gated latch* is level-sensitive
(transparent while the clock line is 1, holding while it is 0), and a
*flip-flop* is master-slave, transferring on the clock's 1->0 edge.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

from revseq.circuit import (
    C,
    Circuit,
    CircuitError,
    Gate,
    Kind,
    N,
    T,
    simulate_permutation,
)
from revseq.synthesis import TruthTable, check_bijective


class FeedbackError(ValueError):
    pass


@dataclass(frozen=True)
class FeedbackCircuit:
    core: Circuit
    feedback: tuple[tuple[int, int], ...]
    initial_state: tuple[tuple[int, int], ...] = ()
    output_line: int | None = None
    clock_line: int | None = None
    # explicit core table; only used to check cores that are not circuits
    table: tuple[int, ...] | None = None

    def __post_init__(self):
        outs = [o for o, _ in self.feedback]
        ins = [i for _, i in self.feedback]
        if len(set(outs)) != len(outs) or len(set(ins)) != len(ins):
            raise FeedbackError("feedback pairs overlap")
        for ln in outs + ins:
            if not 0 <= ln < self.core.width:
                raise FeedbackError(f"feedback line {ln} out of range")
        if set(ins) & set(self.core.constant_map):
            raise FeedbackError("a feedback input is also a constant line")
        if self.clock_line is None and "clk" in self.core.names:
            object.__setattr__(self, "clock_line", self.core.names.index("clk"))

    @property
    def width(self) -> int:
        return self.core.width

    @property
    def state_lines(self) -> tuple[int, ...]:
        return tuple(i for _, i in self.feedback)

    @property
    def input_lines(self) -> tuple[int, ...]:
        fixed = set(self.state_lines) | set(self.core.constant_map)
        return tuple(ln for ln in range(self.width) if ln not in fixed)

    @property
    def q_line(self) -> int:
        if self.output_line is not None:
            return self.output_line
        if not self.feedback:
            raise FeedbackError("no output line and no feedback pair")
        return self.feedback[0][0]

    def initial(self) -> tuple[int, ...]:
        init = dict(self.initial_state)
        return tuple(init.get(i, 0) for i in self.state_lines)

    def core_map(self) -> tuple[int, ...]:
        if self.table is not None:
            return self.table
        return _core_map(self.core)


@lru_cache(maxsize=256)
def _core_map(core: Circuit) -> tuple[int, ...]:
    return simulate_permutation(core).map


def combinational(c: Circuit) -> FeedbackCircuit:
    """Wrap a combinational circuit with no feedback."""
    return FeedbackCircuit(c, (), output_line=c.width - 1)


def feedback_count(f: FeedbackCircuit) -> int:
    return len(f.feedback)


def _bit(word: int, n: int, line: int) -> int:
    return (word >> (n - 1 - line)) & 1


def _require_reversible(f: FeedbackCircuit) -> None:
    rows = f.core_map()
    res = check_bijective(TruthTable(f.width, f.width, tuple(rows)))
    if not res:
        raise FeedbackError(f"core is not reversible: inputs {res.pair} share an output")


# -- simulation -----------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    inputs: tuple[int, ...]
    before: int
    after: int
    q: int


@dataclass(frozen=True)
class Trace:
    width: int
    steps: tuple[Step, ...]
    final_state: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def q_values(self) -> list[int]:
        return [s.q for s in self.steps]


def _compose_word(f: FeedbackCircuit, inputs: Sequence[int], state: Sequence[int]) -> int:
    n = f.width
    word = 0
    for ln, v in zip(f.input_lines, inputs):
        word |= (v & 1) << (n - 1 - ln)
    for ln, v in zip(f.state_lines, state):
        word |= (v & 1) << (n - 1 - ln)
    for ln, v in f.core.constants:
        word |= v << (n - 1 - ln)
    return word


def run_sequence(
    f: FeedbackCircuit,
    inputs: Sequence[Sequence[int]],
    initial_state: Sequence[int] | None = None,
) -> Trace:
    """Apply the core once per input vector, threading state through the pairs."""
    n = f.width
    rows = f.core_map()
    state = tuple(f.initial() if initial_state is None else initial_state)
    if len(state) != len(f.feedback):
        raise FeedbackError(f"expected {len(f.feedback)} state bit(s), got {len(state)}")
    k = len(f.input_lines)
    steps = []
    for vec in inputs:
        vec = tuple(vec)
        if len(vec) != k:
            raise FeedbackError(f"input vector {vec} has width {len(vec)}, core takes {k}")
        before = _compose_word(f, vec, state)
        after = rows[before]
        state = tuple(_bit(after, n, o) for o, _ in f.feedback)
        steps.append(Step(vec, before, after, _bit(after, n, f.q_line)))
    return Trace(n, tuple(steps), state)


def unroll(f: FeedbackCircuit, steps: int) -> tuple[Circuit, tuple[int, ...]]:
    """Cascade ``steps`` copies of the core into one combinational circuit.

    Copy 0 uses the core's own lines; each later copy appends fresh lines for
    its free inputs and constants, in core line order.  Returns the circuit
    and the unrolled lines that hold the final state, one per feedback pair.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    _require_reversible(f)
    core = f.core
    fresh = [ln for ln in range(core.width) if ln not in f.state_lines]
    width = core.width + (steps - 1) * len(fresh)
    names = list(core.names)
    constants = list(core.constants)
    gates: list[Gate] = list(core.gates)
    wire = {ln: ln for ln in range(core.width)}
    const = core.constant_map
    for s in range(1, steps):
        prev = wire
        wire = {}
        for (o, i) in f.feedback:
            wire[i] = prev[o]
        base = core.width + (s - 1) * len(fresh)
        for j, ln in enumerate(fresh):
            wire[ln] = base + j
            names.append(f"{core.names[ln]}@{s}")
            if ln in const:
                constants.append((base + j, const[ln]))
        gates.extend(g.relabel(wire) for g in core.gates)
    final = tuple(wire[o] for o, _ in f.feedback)
    return Circuit(width, tuple(gates), tuple(names), tuple(constants)), final


# -- latch specifications -------------------------------------------------------


@dataclass(frozen=True)
class LatchSpec:
    name: str
    inputs: tuple[str, ...]
    next_state: Callable[..., int]
    clocked: bool = False
    clock: str = "clk"

    def step(self, values: dict[str, int], q: int) -> int:
        if self.clocked and not values[self.clock]:
            return q
        return int(self.next_state(*(values[x] for x in self.inputs), q)) & 1

    def clocked_version(self) -> "LatchSpec":
        return replace(self, clocked=True)

    @property
    def all_inputs(self) -> tuple[str, ...]:
        return self.inputs + ((self.clock,) if self.clocked else ())

    def source_table(self) -> TruthTable:
        """Irreversible table (inputs..., Q) -> Q+."""
        return TruthTable.from_function(len(self.inputs) + 1, 1, lambda *xs: self.next_state(*xs))


SPECS = {
    "sr": LatchSpec("sr", ("s", "r"), lambda s, r, q: s if s ^ r else q),
    "d": LatchSpec("d", ("d",), lambda d, q: d),
    "jk": LatchSpec("jk", ("j", "k"), lambda j, k, q: (j & (1 - q)) | ((1 - k) & q)),
    "t": LatchSpec("t", ("t",), lambda t, q: t ^ q),
}


def get_spec(name: str, clocked: bool = False) -> LatchSpec:
    try:
        spec = SPECS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown latch spec {name!r}; choose from {sorted(SPECS)}") from None
    return spec.clocked_version() if clocked else spec


# -- verification ---------------------------------------------------------------


@dataclass(frozen=True)
class Counterexample:
    initial_q: int
    inputs: tuple[tuple[int, ...], ...]
    expected: tuple[int, ...]
    got: tuple[int, ...]

    def __str__(self) -> str:
        seq = " ".join("".join(map(str, v)) for v in self.inputs)
        return (
            f"from Q={self.initial_q}, inputs {seq}: expected Q "
            f"{''.join(map(str, self.expected))}, got {''.join(map(str, self.got))}"
        )


@dataclass(frozen=True)
class Verdict:
    ok: bool
    bijective: bool
    counterexample: Counterexample | None = None
    message: str = ""
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def _input_order(f: FeedbackCircuit, names: Sequence[str]) -> list[int]:
    """Position in ``names`` of each free input line of ``f``."""
    line_names = [f.core.names[ln] for ln in f.input_lines]
    if sorted(line_names) != sorted(names):
        raise FeedbackError(f"design inputs {line_names} do not match spec inputs {list(names)}")
    return [list(names).index(nm) for nm in line_names]


def _check_bijective(f: FeedbackCircuit) -> Verdict | None:
    res = check_bijective(TruthTable(f.width, f.width, tuple(f.core_map())))
    if not res:
        return Verdict(False, False, message=f"core not bijective: inputs {res.pair} share an output")
    return None


def _initial_states(f: FeedbackCircuit, q_index: int, q: int):
    """Every initial state whose fed-back Q bit is ``q``."""
    k = len(f.feedback)
    for bits in itertools.product((0, 1), repeat=k - 1):
        yield bits[:q_index] + (q,) + bits[q_index:]


def verify_latch(f: FeedbackCircuit, spec: LatchSpec, horizon: int = 4) -> Verdict:
    """Exhaustive check of every input sequence up to ``horizon`` from Q=0 and Q=1."""
    bad = _check_bijective(f)
    if bad is not None:
        return bad
    names = spec.all_inputs
    order = _input_order(f, names)
    q_index = next((j for j, (o, _) in enumerate(f.feedback) if o == f.q_line), None)
    if q_index is None:
        return Verdict(False, True, message="output line is not fed back")
    checked = 0
    for q0 in (0, 1):
        for init in _initial_states(f, q_index, q0):
            for seq in itertools.product(itertools.product((0, 1), repeat=len(names)), repeat=horizon):
                q = q0
                expected = []
                for vec in seq:
                    q = spec.step(dict(zip(names, vec)), q)
                    expected.append(q)
                design_seq = [tuple(vec[p] for p in order) for vec in seq]
                got = run_sequence(f, design_seq, init).q_values
                checked += 1
                if got != expected:
                    n = next(j for j in range(horizon) if got[j] != expected[j]) + 1
                    cx = Counterexample(q0, tuple(seq[:n]), tuple(expected[:n]), tuple(got[:n]))
                    return Verdict(False, True, cx, str(cx), checked)
    return Verdict(True, True, checked=checked, message=f"{checked} sequences")


def verify_flipflop(f: FeedbackCircuit, spec: LatchSpec, horizon: int = 4) -> Verdict:
    """Master-slave contract over every input/clock sequence up to ``horizon``.

    Reference model: the master follows ``spec`` while the clock is 1 and
    holds while it is 0; the output changes only on a 1->0 clock edge, where
    it takes the master's value.  Before the first step the clock is taken
    to be low and the output to show the master.
    """
    bad = _check_bijective(f)
    if bad is not None:
        return bad
    spec = spec.clocked_version()
    names = spec.all_inputs
    order = _input_order(f, names)
    clk = names.index(spec.clock)
    checked = 0
    for q0 in (0, 1):
        init = tuple(q0 for _ in f.feedback)
        for length in range(1, horizon + 1):
            for seq in itertools.product(itertools.product((0, 1), repeat=len(names)), repeat=length):
                m, out, prev = q0, q0, 0
                expected = []
                for vec in seq:
                    m_next = spec.step(dict(zip(names, vec)), m)
                    if prev == 1 and vec[clk] == 0:
                        out = m
                    m, prev = m_next, vec[clk]
                    expected.append(out)
                design_seq = [tuple(vec[p] for p in order) for vec in seq]
                got = run_sequence(f, design_seq, init).q_values
                checked += 1
                if got != expected:
                    cx = Counterexample(q0, tuple(seq), tuple(expected), tuple(got))
                    return Verdict(False, True, cx, str(cx), checked)
    return Verdict(True, True, checked=checked, message=f"{checked} sequences")


# -- construction ---------------------------------------------------------------


def _add_line(c: Circuit, name: str, constant: int | None = None) -> Circuit:
    consts = c.constants + (((c.width, constant),) if constant is not None else ())
    return Circuit(c.width + 1, c.gates, tuple(c.names) + (name,), consts, c.garbage)


def build_gated(latch: FeedbackCircuit, clock_name: str = "clk") -> FeedbackCircuit:
    """Conjoin a new clock line (appended last) to every gate targeting Q.

    N becomes C and C becomes T.  A Toffoli targeting Q would need three
    controls, so it is realized with one clean ancilla line (constant 0) as
    three Toffolis.
    """
    if clock_name in latch.core.names:
        raise FeedbackError(f"line name {clock_name!r} already used")
    q = latch.q_line
    core = _add_line(latch.core, clock_name)
    clk = core.width - 1
    need_ancilla = any(q in g.targets and len(g.controls) == 2 for g in core.gates)
    anc = None
    if need_ancilla:
        core = _add_line(core, "anc", constant=0)
        anc = core.width - 1
    gates: list[Gate] = []
    for g in core.gates:
        if q not in g.targets:
            gates.append(g)
            continue
        if g.kind is not Kind.X:
            raise CircuitError(f"{g}: only N/C/T gates targeting Q can be gated")
        if len(g.controls) == 0:
            gates.append(C(clk, q))
        elif len(g.controls) == 1:
            gates.append(T(g.controls[0], clk, q))
        elif len(g.controls) == 2:
            a, b = g.controls
            gates += [T(a, b, anc), T(anc, clk, q), T(a, b, anc)]
        else:
            raise CircuitError(f"{g}: more than two controls")
    return replace(latch, core=core.with_gates(gates), clock_line=clk)


def build_flipflop(gated: FeedbackCircuit) -> FeedbackCircuit:
    """Append a slave stage to a gated (master) latch.

    The slave inverts the clock, moves the master's Q onto a constant-0 output
    line with a Toffoli controlled by the inverted clock, and copies that line
    onto a second constant-0 line with a CNOT.  The master's feedback pair is
    the only loop.
    """
    if gated.clock_line is None:
        raise FeedbackError("flip-flop needs a gated latch with a clock line")
    clk, m = gated.clock_line, gated.q_line
    core = _add_line(_add_line(gated.core, "o", constant=0), "q_out", constant=0)
    o, out = core.width - 2, core.width - 1
    gates = core.gates + (N(clk), T(clk, m, o), C(o, out))
    return replace(gated, core=core.with_gates(gates), output_line=out)


# -- built-in designs -----------------------------------------------------------

LATCHES = ("sr", "d", "jk", "t")


@lru_cache(maxsize=1)
def _latch_fixtures() -> dict[str, FeedbackCircuit]:
    from revseq.fileformat import block_to_design, parse_blocks

    text = resources.files("revseq.data").joinpath("latches.rev").read_text()
    return {b.name: block_to_design(b) for b in parse_blocks(text)}


def builtin_names() -> list[str]:
    names = []
    for kind in LATCHES:
        names += [f"{kind}-latch", f"gated-{kind}", f"{kind}-ff"]
    return names


def builtin(name: str) -> FeedbackCircuit:
    """Built-in design by name: ``sr-latch``, ``gated-sr``, ``sr-ff`` and likewise for d, jk, t."""
    fixtures = _latch_fixtures()
    if name.endswith("-latch") and name in fixtures:
        return fixtures[name]
    if name.startswith("gated-"):
        return build_gated(builtin(f"{name[6:]}-latch"))
    if name.endswith("-ff"):
        return build_flipflop(builtin(f"gated-{name[:-3]}"))
    raise KeyError(f"unknown design {name!r}; choose from {builtin_names()}")


def builtin_spec(name: str) -> LatchSpec:
    kind = name.removeprefix("gated-").removesuffix("-latch").removesuffix("-ff")
    return get_spec(kind, clocked=name.startswith("gated-") or name.endswith("-ff"))


def latch_table(spec: LatchSpec) -> TruthTable:
    """Reversible table for an unclocked latch core, lines (inputs..., q).

    Q+ goes on the last line.  For SR the garbage columns carry S^R (the
    select signal) and the bit displaced from Q; otherwise the greedy
    embedding fills them.
    """
    from revseq.synthesis import embed_truth_table

    if spec.name == "sr":
        def row(x: int) -> int:
            s, r, q = (x >> 2) & 1, (x >> 1) & 1, x & 1
            sel = s ^ r
            return ((q if sel else s) << 2) | (sel << 1) | (s if sel else q)

        return TruthTable(3, 3, tuple(row(x) for x in range(8)))
    return embed_truth_table(spec.source_table()).target


def synthesize_latch(spec: LatchSpec) -> FeedbackCircuit:
    """Regenerate a latch core with the synthesis pipeline."""
    from revseq.synthesis import synth_pipeline

    t = latch_table(spec)
    c = synth_pipeline(t).circuit
    n = t.n_in
    names = spec.inputs + ("q",)
    core = Circuit(n, c.gates, names, (), frozenset(range(n - 1)))
    return FeedbackCircuit(core, ((n - 1, n - 1),))
