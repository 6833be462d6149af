"""Quantum cost: NCV decomposition, identity reduction, primitive grouping.

The cost of a circuit is the number of 1x1/2x2 primitives needed to build
it.  The protocol is

1. expand to NCT, then replace every Toffoli by its 5-gate NCV form;
2. cancel and merge with the V identities (V.V = N, V.V+ = I, V+.V+ = N),
   moving gates so that ones sharing two lines sit together;
3. count maximal contiguous runs confined to two lines, one primitive each;
4. keep the smaller of that count and any certified catalog realization of
   the whole circuit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

from revseq.circuit import C, Circuit, CircuitError, Gate, Kind, V, Vdag, relabel_circuit
from revseq.optimizer import (
    Template,
    deletion_pass,
    default_templates,
    moving_pass,
    primitive_runs,
    run_count,
    template_pass,
)
from revseq.unitary import ExactUnitary, circuit_unitary, gate_unitary


class UncertifiedRealization(ValueError):
    pass


# -- decomposition --------------------------------------------------------------


@lru_cache(maxsize=None)
def _certify_toffoli_local(order: tuple[int, int, int]) -> None:
    c1, c2, t = order
    ncv = Circuit(3, _toffoli_gates(c1, c2, t))
    if circuit_unitary(ncv) != gate_unitary(Gate(Kind.X, (c1, c2), (t,)), 3):
        raise UncertifiedRealization("Toffoli NCV decomposition failed certification")


def _toffoli_gates(c1: int, c2: int, t: int) -> tuple[Gate, ...]:
    return (V(c2, t), C(c1, c2), Vdag(c2, t), C(c1, c2), V(c1, t))


def toffoli_to_ncv(g: Gate, swap_controls: bool = False) -> tuple[Gate, ...]:
    """V(c2;t) C(c1;c2) V+(c2;t) C(c1;c2) V(c1;t) for T(c1,c2;t).

    Controls are taken in line order unless ``swap_controls`` is set.
    """
    if g.kind is not Kind.X or len(g.controls) != 2:
        raise CircuitError(f"{g} is not a two-control Toffoli")
    c1, c2 = g.controls[::-1] if swap_controls else g.controls
    (t,) = g.targets
    # certification is relabeling-invariant, so check the 3-line shape once
    ranks = {ln: i for i, ln in enumerate(sorted((c1, c2, t)))}
    _certify_toffoli_local((ranks[c1], ranks[c2], ranks[t]))
    return _toffoli_gates(c1, c2, t)


def _line_signature(gates: Sequence[Gate], line: int) -> tuple:
    """How ``line`` is used across the circuit, without reference to labels."""
    return tuple((i, "t" if line in g.targets else "c") for i, g in enumerate(gates) if line in g.lines)


def _canonical_flips(gates: Sequence[Gate]) -> tuple[bool, ...]:
    """Per Toffoli: swap the control roles so c1 has the smaller signature."""
    flips = []
    for g in gates:
        if g.kind is Kind.X and len(g.controls) == 2:
            a, b = g.controls
            flips.append(_line_signature(gates, b) < _line_signature(gates, a))
    return tuple(flips)


def circuit_to_ncv(c: Circuit, registry=None, flips: Sequence[bool] | None = None) -> Circuit:
    """Expand to NCT, then replace each Toffoli by its 5-gate NCV form.

    ``flips[j]`` exchanges the two control roles of the j-th Toffoli; by
    default controls are taken in line order.
    """
    from revseq.equivalence import expand_to_nct

    nct = expand_to_nct(c, registry)
    out: list[Gate] = []
    j = 0
    for g in nct.gates:
        if g.kind is Kind.X and len(g.controls) == 2:
            out.extend(toffoli_to_ncv(g, swap_controls=flips is not None and flips[j]))
            j += 1
        elif g.kind is Kind.X and len(g.controls) > 2:
            raise CircuitError(f"{g}: no NCV expansion for more than two controls")
        else:
            out.append(g)
    return nct.with_gates(out)


# -- catalog --------------------------------------------------------------------


@dataclass(frozen=True)
class Realization:
    name: str
    target: Gate
    gates: Circuit

    def __post_init__(self):
        if circuit_unitary(self.gates) != gate_unitary(self.target, self.gates.width):
            raise UncertifiedRealization(f"realization {self.name!r} does not equal {self.target}")

    @property
    def cost(self) -> int:
        return run_count(self.gates.gates)

    @property
    def arity(self) -> int:
        return self.gates.width


class Catalog:
    def __init__(self, entries: Iterable[Realization] = ()):
        self.entries: list[Realization] = list(entries)

    def add(self, r: Realization) -> None:
        self.entries.append(r)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def match(self, c: Circuit) -> tuple[Realization, Circuit] | None:
        """Cheapest realization equal to ``c`` on its active lines, up to relabeling."""
        support = sorted(set().union(*(g.lines for g in c.gates))) if c.gates else []
        best = None
        for r in self.entries:
            if r.arity != len(support):
                continue
            local = relabel_circuit(
                Circuit(c.width, c.gates),
                {ln: i for i, ln in enumerate(support)} | {
                    ln: len(support) + j for j, ln in enumerate(x for x in range(c.width) if x not in support)
                },
            )
            if local.width > r.arity:
                local = Circuit(r.arity, local.gates)
            target = circuit_unitary(local)
            for perm in itertools.permutations(range(r.arity)):
                if circuit_unitary(relabel_circuit(r.gates, perm)) == target:
                    placed = relabel_circuit(r.gates, perm)
                    back = Circuit(c.width, tuple(g.relabel(dict(enumerate(support))) for g in placed.gates))
                    if best is None or r.cost < best[0].cost:
                        best = (r, back)
                    break
        return best


def load_catalog(text: str) -> Catalog:
    from revseq.fileformat import _parse_gate, parse_blocks

    cat = Catalog()
    for b in parse_blocks(text):
        if not b.target:
            raise UncertifiedRealization(f"catalog block {b.name!r} has no .target")
        op, _, args = b.target.partition(" ")
        idx = {n: i for i, n in enumerate(b.names)}
        target = _parse_gate(op, [a.strip() for a in args.split(",")], idx, 0, 1)
        cat.add(Realization(b.name or "", target, b.circuit()))
    return cat


@lru_cache(maxsize=1)
def default_catalog() -> Catalog:
    text = resources.files("revseq.data").joinpath("catalog.rev").read_text()
    return load_catalog(text)


# -- realization search ---------------------------------------------------------


def _pair_blocks(width: int, block_len: int) -> list[tuple[tuple[Gate, ...], ExactUnitary]]:
    blocks = []
    ident = ExactUnitary.identity(width)
    for a, b in itertools.combinations(range(width), 2):
        alphabet = [k(x, y) for k in (C, V, Vdag) for x, y in ((a, b), (b, a))]
        seen = {ident.key()}
        for length in range(1, block_len + 1):
            for seq in itertools.product(alphabet, repeat=length):
                u = circuit_unitary(Circuit(width, seq))
                if u.key() in seen:
                    continue
                seen.add(u.key())
                blocks.append((seq, u))
    return blocks


def _pair_of(seq: Sequence[Gate]) -> frozenset[int]:
    return frozenset().union(*(g.lines for g in seq))


def search_realization(
    target: ExactUnitary, max_primitives: int = 5, block_len: int = 2
) -> Circuit | None:
    """Fewest-primitive {C, V, V+} realization of ``target``, or None.

    A primitive is a product of at most ``block_len`` gates on one line pair;
    consecutive primitives use different pairs.  Meet-in-the-middle over
    primitive sequences; among solutions of the smallest length the one with
    fewest runs, then fewest gates, then smallest gate list wins.
    """
    width = target.n
    blocks = _pair_blocks(width, block_len)
    fwd_depth = (max_primitives + 1) // 2
    # forward[d]: unitary key -> (sequence of block indices, unitary)
    forward: list[dict] = [{ExactUnitary.identity(width).key(): ((), ExactUnitary.identity(width))}]
    for d in range(1, fwd_depth + 1):
        layer: dict = {}
        for seq, u in forward[-1].values():
            last = _pair_of(blocks[seq[-1]][0]) if seq else None
            for bi, (gs, bu) in enumerate(blocks):
                if _pair_of(gs) == last:
                    continue
                nu = bu @ u
                key = nu.key()
                if key not in layer and all(key not in f for f in forward):
                    layer[key] = (seq + (bi,), nu)
        forward.append(layer)

    def suffixes(length):
        for combo in itertools.product(range(len(blocks)), repeat=length):
            pairs = [_pair_of(blocks[i][0]) for i in combo]
            if any(p == q for p, q in zip(pairs, pairs[1:])):
                continue
            yield combo

    for total in range(1, max_primitives + 1):
        solutions = []
        f_len = min(total, fwd_depth)
        s_len = total - f_len
        for suf in suffixes(s_len):
            s_u = ExactUnitary.identity(width)
            for i in suf:
                s_u = blocks[i][1] @ s_u
            need = s_u.dagger() @ target
            hit = forward[f_len].get(need.key())
            if hit is None:
                continue
            seq = hit[0] + suf
            pairs = [_pair_of(blocks[i][0]) for i in seq]
            if any(p == q for p, q in zip(pairs, pairs[1:])):
                continue
            gates = tuple(g for i in seq for g in blocks[i][0])
            solutions.append(gates)
        if solutions:
            best = min(solutions, key=lambda gs: (run_count(gs), len(gs), [str(g) for g in gs]))
            return Circuit(width, best)
    return None


# -- cost -----------------------------------------------------------------------

NCV_TEMPLATES = tuple(t for t in default_templates() if t.name in {"v-vdag", "v-v-cnot", "vdag-vdag-cnot", "cnot-pair", "not-pair"})


@dataclass(frozen=True)
class QuantumCost:
    cost: int
    witness: Circuit
    runs: tuple[tuple[int, int], ...]
    method: str
    rewrite_cost: int
    ncv_count: int

    def __int__(self) -> int:
        return self.cost


def reduce_ncv(ncv: Circuit, templates: Sequence[Template] = NCV_TEMPLATES) -> Circuit:
    """Cancel/merge with the V identities and regroup until stable."""
    cur = ncv
    for _ in range(50):
        before = cur.gates
        cur, _ = deletion_pass(cur)
        cur, _ = template_pass(cur, templates)
        cur, _ = moving_pass(cur, "group")
        if cur.gates == before:
            break
    return cur


# Toffoli counts up to this are decomposed under every control ordering
EXHAUSTIVE_TOFFOLIS = 4


def _ncv_candidates(c: Circuit, registry) -> list[Circuit]:
    """NCV expansions whose reduced cost does not depend on line labels.

    The two controls of a Toffoli play different roles in its NCV form, so
    every ordering is tried when there are few Toffolis; otherwise each
    ordering is fixed by how the control lines are used in the circuit.
    """
    from revseq.equivalence import expand_to_nct

    nct = expand_to_nct(c, registry)
    k = sum(1 for g in nct.gates if g.kind is Kind.X and len(g.controls) == 2)
    if k <= EXHAUSTIVE_TOFFOLIS:
        return [circuit_to_ncv(nct, registry, flips) for flips in itertools.product((False, True), repeat=k)]
    return [circuit_to_ncv(nct, registry, _canonical_flips(nct.gates))]


def quantum_cost(c: Circuit, catalog: Catalog | None = None, registry=None) -> QuantumCost:
    best = None
    ncv = None
    for cand in _ncv_candidates(c, registry):
        witness = reduce_ncv(cand)
        rewrite = run_count(witness.gates)
        key = (rewrite, len(witness))
        if best is None or key < (best.cost, len(best.witness)):
            best = QuantumCost(rewrite, witness, tuple(primitive_runs(witness.gates)), "rewrite", rewrite, len(witness))
            ncv = cand
    cat = default_catalog() if catalog is None else catalog
    hit = cat.match(ncv) if ncv.gates and ncv.width <= 8 else None
    if hit is not None and hit[0].cost < best.cost:
        r, placed = hit
        placed = ncv.with_gates(placed.gates)
        best = QuantumCost(r.cost, placed, tuple(primitive_runs(placed.gates)), f"catalog:{r.name}", best.rewrite_cost, best.ncv_count)
    return best


@dataclass(frozen=True)
class CostReport:
    nct_count: int
    ncv_count: int
    garbage: int
    quantum_cost: int
    total_cost: int
    feedback_loops: int = 0

    def __post_init__(self):
        if self.total_cost != self.nct_count + self.quantum_cost + self.garbage:
            raise ValueError("total cost must equal NCT count + QC + garbage")

    def as_dict(self) -> dict[str, int]:
        return {
            "NCT": self.nct_count,
            "NCV": self.ncv_count,
            "G": self.garbage,
            "QC": self.quantum_cost,
            "TC": self.total_cost,
            "FB": self.feedback_loops,
        }


def cost_report(design, catalog: Catalog | None = None, registry=None) -> CostReport:
    from revseq.equivalence import expand_to_nct
    from revseq.sequential import FeedbackCircuit, feedback_count

    loops = 0
    c = design
    if isinstance(design, FeedbackCircuit):
        loops = feedback_count(design)
        c = design.core
    nct = expand_to_nct(c, registry)
    qc = quantum_cost(c, catalog, registry)
    nct_count = len(nct)
    garbage = len(c.garbage)
    return CostReport(
        nct_count=nct_count,
        ncv_count=qc.ncv_count,
        garbage=garbage,
        quantum_cost=qc.cost,
        total_cost=nct_count + qc.cost + garbage,
        feedback_loops=loops,
    )
