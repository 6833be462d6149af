"""Local optimization: deletion rule, moving rule and template matching.

Commutation is decided semantically: two gates commute when the exact
unitaries of ``[a, b]`` and ``[b, a]`` agree on the lines they touch.  Every
rewrite here is therefore semantics-preserving by construction, including
moves that a syntactic control/target rule would refuse.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

from revseq.circuit import (
    C,
    Circuit,
    CircuitError,
    FREDKIN,
    Gate,
    Kind,
    N,
    SWAP,
    T,
    V,
    Vdag,
    simulate_permutation,
)
from revseq.unitary import circuit_unitary


@dataclass(frozen=True)
class TraceEntry:
    pass_name: str
    span: tuple[int, int]
    before: int
    after: int


@dataclass
class RewriteTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def add(self, pass_name: str, span: tuple[int, int], before: int, after: int) -> None:
        self.entries.append(TraceEntry(pass_name, span, before, after))

    def extend(self, other: "RewriteTrace") -> None:
        self.entries.extend(other.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)


# -- commutation ----------------------------------------------------------------


def _localize(gates: Sequence[Gate]) -> tuple[int, tuple[Gate, ...]]:
    lines = sorted(set().union(*(g.lines for g in gates)))
    m = {ln: i for i, ln in enumerate(lines)}
    return len(lines), tuple(g.relabel(m) for g in gates)


@lru_cache(maxsize=1 << 16)
def _commute_local(width: int, a: Gate, b: Gate) -> bool:
    ab = circuit_unitary(Circuit(width, (a, b)), cap=max(width, 8))
    ba = circuit_unitary(Circuit(width, (b, a)), cap=max(width, 8))
    return ab == ba


def can_commute(a: Gate, b: Gate) -> bool:
    """True iff ``[a, b]`` and ``[b, a]`` have exactly the same unitary."""
    if not (a.lines & b.lines):
        return True
    if a == b:
        return True
    width, (la, lb) = _localize((a, b))
    # order-independent cache key keeps the relation symmetric
    if (la.kind.value, la.controls, la.targets, la.name) > (lb.kind.value, lb.controls, lb.targets, lb.name):
        la, lb = lb, la
    return _commute_local(width, la, lb)


def _is_inverse(a: Gate, b: Gate) -> bool:
    try:
        return a.inverse() == b
    except CircuitError:
        return False


# -- deletion -------------------------------------------------------------------


def _find_cancellation(gates: list[Gate], i: int) -> int | None:
    """Index j > i of a gate that cancels gates[i] once the two are moved together."""
    gi = gates[i]
    for j in range(i + 1, len(gates)):
        gj = gates[j]
        if _is_inverse(gi, gj):
            between = gates[i + 1 : j]
            if all(can_commute(gi, g) for g in between) or all(can_commute(gj, g) for g in between):
                return j
    return None


def deletion_pass(c: Circuit) -> tuple[Circuit, RewriteTrace]:
    """Remove inverse pairs that are adjacent or can be made adjacent by commuting."""
    gates = list(c.gates)
    trace = RewriteTrace()
    i = 0
    while i < len(gates):
        j = _find_cancellation(gates, i)
        if j is None:
            i += 1
            continue
        before = len(gates)
        del gates[j]
        del gates[i]
        trace.add("deletion", (i, j), before, len(gates))
        i = max(i - 1, 0)
    return c.with_gates(gates), trace


# -- moving ---------------------------------------------------------------------


def primitive_runs(gates: Sequence[Gate]) -> list[tuple[int, int]]:
    """Split into maximal contiguous runs confined to at most two lines.

    Greedy left-to-right cutting is optimal for this interval constraint.
    Returns ``[start, end)`` spans.
    """
    spans = []
    start = 0
    support: set[int] = set()
    for i, g in enumerate(gates):
        merged = support | g.lines
        if i > start and len(merged) > 2:
            spans.append((start, i))
            start = i
            merged = set(g.lines)
        support = merged
    if gates:
        spans.append((start, len(gates)))
    return spans


def run_count(gates: Sequence[Gate]) -> int:
    return len(primitive_runs(gates))


def _move(gates: list[Gate], src: int, dst: int) -> list[Gate]:
    out = list(gates)
    g = out.pop(src)
    out.insert(dst, g)
    return out


def _reachable(gates: Sequence[Gate], i: int) -> tuple[int, int]:
    """Leftmost and rightmost slot gate i can move to by commuting."""
    g = gates[i]
    lo = i
    while lo > 0 and can_commute(g, gates[lo - 1]):
        lo -= 1
    hi = i
    while hi < len(gates) - 1 and can_commute(g, gates[hi + 1]):
        hi += 1
    return lo, hi


def _group_step(gates: list[Gate]) -> tuple[list[Gate], tuple[int, int]] | None:
    best = None
    base = run_count(gates)
    for i in range(len(gates)):
        lo, hi = _reachable(gates, i)
        for dst in range(lo, hi + 1):
            if dst == i:
                continue
            cand = _move(gates, i, dst)
            score = run_count(cand)
            if score < base and (best is None or score < best[0]):
                best = (score, cand, (i, dst))
    if best is None:
        return None
    return best[1], best[2]


def _pair_step(gates: list[Gate]) -> tuple[list[Gate], tuple[int, int]] | None:
    for i in range(len(gates)):
        j = _find_cancellation(gates, i)
        if j is None or j == i + 1:
            continue
        between = gates[i + 1 : j]
        if all(can_commute(gates[j], g) for g in between):
            return _move(gates, j, i + 1), (j, i + 1)
        return _move(gates, i, j - 1), (i, j - 1)
    return None


def moving_pass(c: Circuit, objective: str = "inverse") -> tuple[Circuit, RewriteTrace]:
    """Reorder gates by semantic commutation.

    ``objective="inverse"`` brings cancelling pairs next to each other;
    ``objective="group"`` lowers the number of two-line primitive runs.
    The number of moves is bounded by width x gate count.
    """
    step = {"inverse": _pair_step, "group": _group_step}[objective]
    gates = list(c.gates)
    trace = RewriteTrace()
    budget = max(1, c.width * len(gates))
    while budget > 0:
        res = step(gates)
        if res is None:
            break
        gates, span = res
        trace.add(f"moving:{objective}", span, len(gates), len(gates))
        budget -= 1
    return c.with_gates(gates), trace


# -- templates ------------------------------------------------------------------

_GATE_WEIGHT = {Kind.V: 1, Kind.VDAG: 1, Kind.SWAP: 3, Kind.FREDKIN: 5}


def gate_weight(g: Gate) -> int:
    """Quantum-cost weight used to break equal-length template rewrites."""
    if g.kind is Kind.X:
        k = len(g.controls)
        return 1 if k <= 1 else 5 if k == 2 else 2 ** (k + 1) - 3
    return _GATE_WEIGHT.get(g.kind, 10)


class UncertifiedTemplate(ValueError):
    pass


@dataclass(frozen=True)
class Template:
    name: str
    gates: Circuit

    def __post_init__(self):
        if not circuit_unitary(self.gates).is_identity():
            raise UncertifiedTemplate(f"template {self.name!r} is not an identity")

    @property
    def size(self) -> int:
        return len(self.gates)

    def variants(self) -> list[tuple[Gate, ...]]:
        """All rotations of the gate list and of its inverse, without repeats."""
        base = tuple(self.gates.gates)
        inv = tuple(g.inverse() for g in reversed(base))
        out: list[tuple[Gate, ...]] = []
        for seq in (base, inv):
            for r in range(len(seq)):
                rot = seq[r:] + seq[:r]
                if rot not in out:
                    out.append(rot)
        return out


def default_templates() -> tuple[Template, ...]:
    return _DEFAULT_TEMPLATES


_DEFAULT_TEMPLATES = (
    Template("not-pair", Circuit(1, (N(0), N(0)))),
    Template("cnot-pair", Circuit(2, (C(0, 1), C(0, 1)))),
    Template("toffoli-pair", Circuit(3, (T(0, 1, 2), T(0, 1, 2)))),
    Template("v-vdag", Circuit(2, (V(0, 1), Vdag(0, 1)))),
    Template("swap-pair", Circuit(2, (SWAP(0, 1), SWAP(0, 1)))),
    Template("fredkin-pair", Circuit(3, (FREDKIN(0, 1, 2), FREDKIN(0, 1, 2)))),
    Template("v-v-cnot", Circuit(2, (V(0, 1), V(0, 1), C(0, 1)))),
    Template("vdag-vdag-cnot", Circuit(2, (Vdag(0, 1), Vdag(0, 1), C(0, 1)))),
    Template("cnot-swap", Circuit(2, (C(0, 1), C(1, 0), C(0, 1), SWAP(0, 1)))),
    Template(
        "fredkin-three-toffoli",
        Circuit(3, (T(0, 1, 2), T(0, 2, 1), T(0, 1, 2), C(2, 1), T(0, 1, 2), C(2, 1))),
    ),
)


def load_templates(text: str) -> tuple[Template, ...]:
    """Templates from circuit-format blocks, each certified on load."""
    from revseq.fileformat import parse_blocks

    return tuple(Template(b.name or f"template-{i}", b.circuit()) for i, b in enumerate(parse_blocks(text)))


def _match_gate(tg: Gate, cg: Gate, mapping: dict[int, int]) -> list[dict[int, int]]:
    """Extensions of ``mapping`` (template line -> circuit line) sending tg onto cg."""
    if tg.kind != cg.kind or tg.name != cg.name or len(tg.controls) != len(cg.controls):
        return []
    if len(tg.targets) != len(cg.targets):
        return []
    # SWAP/FREDKIN targets are unordered
    target_orders = [cg.targets]
    if tg.kind in (Kind.SWAP, Kind.FREDKIN):
        target_orders = [cg.targets, cg.targets[::-1]]
    out = []
    for ctrl_order in permutations(cg.controls):
        for tgt_order in target_orders:
            m = dict(mapping)
            used = set(m.values())
            ok = True
            for a, b in zip(tg.controls + tg.targets, ctrl_order + tuple(tgt_order)):
                if a in m:
                    if m[a] != b:
                        ok = False
                        break
                elif b in used:
                    ok = False
                    break
                else:
                    m[a] = b
                    used.add(b)
            if ok and m not in out:
                out.append(m)
    return out


def _match_template(
    gates: Sequence[Gate], start: int, seq: Sequence[Gate], window: int
) -> tuple[int, list[int], dict[int, int]] | None:
    """Longest prefix of ``seq`` matched from ``gates[start]`` on.

    Later template gates may be picked up further right provided they commute
    past every skipped circuit gate.  Returns (m, matched indices, mapping).
    """
    best = None
    for m0 in _match_gate(seq[0], gates[start], {}):
        matched = [start]
        mapping = m0
        skipped: list[int] = []
        pos = start + 1
        j = 1
        while j < len(seq) and pos < len(gates) and len(skipped) <= window:
            g = gates[pos]
            exts = _match_gate(seq[j], g, mapping)
            if exts and all(can_commute(g, gates[s]) for s in skipped):
                mapping = exts[0]
                matched.append(pos)
                j += 1
            else:
                skipped.append(pos)
            pos += 1
        if best is None or len(matched) > best[0]:
            best = (len(matched), matched, mapping)
    return best


def _replacement(seq: Sequence[Gate], m: int, mapping: dict[int, int]) -> list[Gate] | None:
    rest = seq[m:]
    needed = set().union(*(g.lines for g in rest)) if rest else set()
    if not needed <= mapping.keys():
        return None
    return [g.inverse().relabel(mapping) for g in reversed(rest)]


def template_pass(
    c: Circuit, lib: Iterable[Template] | None = None, window: int = 4
) -> tuple[Circuit, RewriteTrace]:
    """Replace majority template matches by the inverted remainder.

    A match of ``m`` gates from a size-``k`` template is applied when
    ``m > k/2`` (gate count drops) or when ``m == k/2`` and the replacement
    has strictly lower weight.  Replacements never introduce gate kinds that
    are absent from the input circuit.
    """
    lib = tuple(default_templates() if lib is None else lib)
    variants = [(t, seq) for t in lib for seq in t.variants()]
    present = {(g.kind, g.name) for g in c.gates}
    gates = list(c.gates)
    trace = RewriteTrace()
    changed = True
    while changed:
        changed = False
        for start in range(len(gates)):
            for tmpl, seq in variants:
                k = len(seq)
                res = _match_template(gates, start, seq, window)
                if res is None:
                    continue
                m, matched, mapping = res
                if 2 * m < k:
                    continue
                repl = _replacement(seq, m, mapping)
                if repl is None:
                    continue
                if any((g.kind, g.name) not in present for g in repl):
                    continue
                old = [gates[i] for i in matched]
                if 2 * m == k and sum(map(gate_weight, repl)) >= sum(map(gate_weight, old)):
                    continue
                keep = [gates[i] for i in range(matched[0], matched[-1] + 1) if i not in matched]
                before = len(gates)
                gates = gates[: matched[0]] + repl + keep + gates[matched[-1] + 1 :]
                trace.add(f"template:{tmpl.name}", (matched[0], matched[-1]), before, len(gates))
                changed = True
                break
            if changed:
                break
    return c.with_gates(gates), trace


# -- fixpoint driver ------------------------------------------------------------


def optimize(
    c: Circuit, templates: Iterable[Template] | None = None, max_rounds: int = 100
) -> tuple[Circuit, RewriteTrace]:
    """Run deletion, moving and template passes until none changes the circuit."""
    trace = RewriteTrace()
    lib = tuple(default_templates() if templates is None else templates)
    for _ in range(max_rounds):
        before = c.gates
        for p in (deletion_pass, lambda x: moving_pass(x, "inverse"), lambda x: template_pass(x, lib)):
            c, t = p(c)
            trace.extend(t)
        if c.gates == before:
            break
    return c, trace


def same_semantics(a: Circuit, b: Circuit) -> bool:
    if all(g.is_classical for g in a.gates + b.gates):
        return simulate_permutation(a) == simulate_permutation(b)
    from revseq.unitary import unitary_equivalent

    return unitary_equivalent(a, b)
