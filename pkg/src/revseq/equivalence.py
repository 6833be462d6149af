"""Registry of non-NCT gates with certified NCT expansions, and design comparison.

Each entry stores the gate's truth table over its own lines and an NCT
circuit that realizes it, optionally with clean ancilla lines appended after
the gate lines.  An entry is accepted only if the circuit, run with every
ancilla at 0, reproduces the table and returns the ancillas to 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from revseq.circuit import C, Circuit, Gate, Kind, Permutation, T, simulate_states
from revseq.synthesis import TruthTable


class CertificationError(ValueError):
    pass


class UnknownGate(KeyError):
    pass


@dataclass(frozen=True)
class GateExpansion:
    name: str
    arity: int
    nct_circuit: Circuit
    semantic_table: Permutation
    ancillas: int = 0
    inverse: str | None = None

    @property
    def nct_count(self) -> int:
        return len(self.nct_circuit)

    @property
    def toffoli_count(self) -> int:
        return sum(1 for g in self.nct_circuit.gates if g.kind is Kind.X and len(g.controls) == 2)


def _certify(name: str, arity: int, circ: Circuit, table: Sequence[int], ancillas: int) -> None:
    if circ.width != arity + ancillas:
        raise CertificationError(f"{name}: circuit width {circ.width} != {arity} + {ancillas} ancilla(s)")
    bad = [g for g in circ.gates if g.kind is not Kind.X or len(g.controls) > 2]
    if bad:
        raise CertificationError(f"{name}: {bad[0]} is not an NCT gate")
    inputs = np.arange(1 << arity, dtype=np.int64) << ancillas
    outputs = simulate_states(circ, inputs)
    expected = np.asarray(table, dtype=np.int64) << ancillas
    if not np.array_equal(outputs, expected):
        x = int(np.flatnonzero(outputs != expected)[0])
        raise CertificationError(
            f"{name}: input {x:0{arity}b} gives {int(outputs[x]):0{arity + ancillas}b}, "
            f"table says {int(expected[x]):0{arity + ancillas}b}"
        )


class Registry:
    def __init__(self, entries: Iterable[GateExpansion] = ()):
        self._entries: dict[str, GateExpansion] = {}
        for e in entries:
            self._entries[e.name] = e

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __iter__(self):
        return iter(self._entries.values())

    def names(self) -> list[str]:
        return list(self._entries)

    def get(self, name: str) -> GateExpansion:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownGate(name) from None

    def register_expansion(
        self,
        name: str,
        arity: int,
        table: Sequence[int] | TruthTable | None = None,
        nct_circuit: Circuit | None = None,
        ancillas: int = 0,
        inverse: str | None = None,
    ) -> GateExpansion:
        """Certify and add an entry.

        With only a table, the NCT circuit comes from the synthesis pipeline.
        With only a circuit, the table is read off the circuit.
        """
        if isinstance(table, TruthTable):
            table = table.rows
        if table is None and nct_circuit is None:
            raise ValueError("need a table, a circuit, or both")
        if nct_circuit is None:
            from revseq.synthesis import synth_pipeline

            if len(set(table)) != len(table):
                raise CertificationError(f"{name}: table is not a bijection")
            tt = TruthTable(arity, arity, tuple(table))
            nct_circuit = synth_pipeline(tt).circuit
            ancillas = 0
        if table is None:
            inputs = np.arange(1 << arity, dtype=np.int64) << ancillas
            table = (simulate_states(nct_circuit, inputs) >> ancillas).tolist()
        try:
            perm = Permutation(arity, tuple(table))
        except ValueError as exc:
            raise CertificationError(f"{name}: table is not a bijection") from exc
        _certify(name, arity, nct_circuit, perm.map, ancillas)
        entry = GateExpansion(name, arity, nct_circuit, perm, ancillas, inverse)
        self._entries[name] = entry
        return entry

    def inverse_name(self, name: str) -> str | None:
        e = self.get(name)
        if e.inverse:
            return e.inverse
        inv = e.semantic_table.inverse()
        if inv == e.semantic_table:
            return name
        for other in self._entries.values():
            if other.arity == e.arity and other.semantic_table == inv:
                return other.name
        return None


def load_registry(text: str, registry: Registry | None = None) -> Registry:
    from revseq.fileformat import parse_blocks

    reg = Registry() if registry is None else registry
    for b in parse_blocks(text):
        if not b.name:
            raise CertificationError("registry block without .name")
        circ = b.circuit()
        anc = len(b.ancilla)
        if b.ancilla and b.names[-anc:] != b.ancilla:
            raise CertificationError(f"{b.name}: ancilla lines must be the last lines")
        reg.register_expansion(
            b.name,
            len(b.names) - anc,
            table=b.table,
            nct_circuit=circ if circ.gates else None,
            ancillas=anc,
            inverse=b.inverse,
        )
    return reg


@lru_cache(maxsize=1)
def default_registry() -> Registry:
    text = resources.files("revseq.data").joinpath("registry.rev").read_text()
    return load_registry(text)


# -- expansion ------------------------------------------------------------------


def _fredkin_nct(c: int, a: int, b: int) -> list[Gate]:
    return [C(b, a), T(c, a, b), C(b, a)]


def expand_to_nct(c: Circuit, registry: Registry | None = None) -> Circuit:
    """Replace SWAP, FREDKIN and catalog gates by NCT circuits.

    Clean ancillas needed by registry expansions are appended as new lines
    with constant input 0 and shared between gates, since each expansion
    returns them to 0.
    """
    reg = default_registry() if registry is None else registry
    need = 0
    for g in c.gates:
        if g.kind is Kind.CATALOG:
            need = max(need, reg.get(g.name).ancillas)
    width = c.width + need
    anc_lines = list(range(c.width, width))
    out: list[Gate] = []
    for g in c.gates:
        if g.kind is Kind.SWAP:
            a, b = g.targets
            out += [C(a, b), C(b, a), C(a, b)]
        elif g.kind is Kind.FREDKIN:
            out += _fredkin_nct(g.controls[0], *g.targets)
        elif g.kind is Kind.CATALOG:
            e = reg.get(g.name)
            if len(g.targets) != e.arity:
                raise ValueError(f"{g.name} takes {e.arity} lines, got {len(g.targets)}")
            mapping = dict(enumerate(g.targets)) | {e.arity + j: anc_lines[j] for j in range(e.ancillas)}
            out += [h.relabel(mapping) for h in e.nct_circuit.gates]
        else:
            out.append(g)
    if not need:
        return c.with_gates(out)
    names = tuple(c.names) + tuple(f"anc{j}" for j in range(need))
    return Circuit(width, tuple(out), names, c.constants + tuple((ln, 0) for ln in anc_lines), c.garbage)


# -- claimed-function checks ----------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    ok: bool
    counterexample: tuple[int, int, int] | None = None  # (free input, got, wanted)

    def __bool__(self) -> bool:
        return self.ok


def check_claimed_function(
    g: GateExpansion,
    claimed: TruthTable,
    bindings: Mapping[int, int],
    outputs: Sequence[int],
) -> Verdict:
    """Does ``g`` with ``bindings`` fixed realize ``claimed`` on ``outputs``?

    Free lines (those not bound) feed the claimed table's inputs in index
    order; ``outputs`` lists the gate lines read as the claimed outputs.
    """
    free = [ln for ln in range(g.arity) if ln not in bindings]
    if claimed.n_in != len(free) or claimed.n_out != len(outputs):
        raise ValueError(
            f"claimed table is {claimed.n_in}->{claimed.n_out}, gate leaves "
            f"{len(free)} free input(s) and {len(outputs)} output(s)"
        )
    if any(ln not in range(g.arity) for ln in bindings):
        raise ValueError("binding refers to a line outside the gate")
    n = g.arity
    for x in range(1 << len(free)):
        word = 0
        for ln, v in bindings.items():
            word |= v << (n - 1 - ln)
        for j, ln in enumerate(free):
            word |= ((x >> (len(free) - 1 - j)) & 1) << (n - 1 - ln)
        y = g.semantic_table.map[word]
        got = 0
        for ln in outputs:
            got = (got << 1) | ((y >> (n - 1 - ln)) & 1)
        if got != claimed.rows[x]:
            return Verdict(False, (x, got, claimed.rows[x]))
    return Verdict(True)


# -- comparison -----------------------------------------------------------------

METRICS = ("nct_count", "ncv_count", "garbage", "quantum_cost", "total_cost", "feedback_loops")


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    design: object
    optimized: Circuit
    report: "object"


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow] = field(default_factory=list)

    def winners(self) -> dict[str, list[str]]:
        out = {}
        for m in METRICS:
            best = min(getattr(r.report, m) for r in self.rows)
            out[m] = sorted(r.name for r in self.rows if getattr(r.report, m) == best)
        return out

    def row(self, name: str) -> ComparisonRow:
        return next(r for r in self.rows if r.name == name)


def compare_designs(designs: Sequence[tuple[str, object]], registry: Registry | None = None) -> ComparisonReport:
    """Expand each design to NCT, optimize it, and cost the result."""
    from dataclasses import replace

    from revseq.optimizer import optimize
    from revseq.qcost import cost_report
    from revseq.sequential import FeedbackCircuit

    report = ComparisonReport()
    for name, design in designs:
        core = design.core if isinstance(design, FeedbackCircuit) else design
        expanded = expand_to_nct(core, registry)
        opt, _ = optimize(expanded)
        costed = replace(design, core=opt) if isinstance(design, FeedbackCircuit) else opt
        report.rows.append(ComparisonRow(name, design, opt, cost_report(costed, registry=registry)))
    return report
