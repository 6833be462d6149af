"""TFC-style circuit text format with garbage, constant and feedback directives.

A block looks like::

    # SR latch core
    .name sr-latch
    .v s,r,q
    .g s,r
    .f q->q
    BEGIN
    t2 s,r
    t3 r,q,s
    END

Directives: ``.v`` line names, ``.c name=0|1`` constant inputs, ``.g`` garbage
outputs, ``.f out->in`` feedback pairs, ``.init name=0|1`` initial feedback
state, ``.q name`` observed output line.  Library files add ``.name``,
``.target`` (catalog realizations), ``.table`` (registry certification rows)
and ``.inverse``/``.ancilla`` (registry gates).  Several blocks may follow
each other in one file.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from revseq.circuit import Circuit, Gate, Kind, MCT, V, Vdag, SWAP, FREDKIN, CATALOG, default_names


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


@dataclass
class Block:
    names: list[str] = field(default_factory=list)
    constants: dict[str, int] = field(default_factory=dict)
    garbage: list[str] = field(default_factory=list)
    feedback: list[tuple[str, str]] = field(default_factory=list)
    init: dict[str, int] = field(default_factory=dict)
    output: str | None = None
    name: str | None = None
    target: str | None = None
    table: list[int] | None = None
    inverse: str | None = None
    ancilla: list[str] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)

    def circuit(self) -> Circuit:
        idx = {n: i for i, n in enumerate(self.names)}
        return Circuit(
            len(self.names),
            tuple(self.gates),
            tuple(self.names),
            tuple((idx[k], v) for k, v in self.constants.items()),
            frozenset(idx[g] for g in self.garbage),
        )


_GATE_ARITY = {"v": 2, "v+": 2, "swap": 2, "f3": 3}


def _split_names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _bit_assignments(arg: str, lineno: int, col: int) -> dict[str, int]:
    out = {}
    for item in _split_names(arg):
        if "=" not in item:
            raise ParseError(f"expected name=0|1, got {item!r}", lineno, col)
        k, v = (s.strip() for s in item.split("=", 1))
        if v not in ("0", "1"):
            raise ParseError(f"value for {k!r} must be 0 or 1", lineno, col)
        out[k] = int(v)
    return out


def _parse_gate(op: str, args: list[str], idx: dict[str, int], lineno: int, col: int) -> Gate:
    for a in args:
        if a not in idx:
            raise ParseError(f"unknown line name {a!r}", lineno, col)
    lines = [idx[a] for a in args]
    if op.startswith("t") and op[1:].isdigit():
        k = int(op[1:])
        if k < 1:
            raise ParseError("Toffoli size must be at least 1", lineno, col)
        if len(lines) != k:
            label = {1: "NOT", 2: "CNOT", 3: "Toffoli"}.get(k, f"t{k}")
            raise ParseError(f"{label} requires {k} line{'s' if k > 1 else ''}", lineno, col)
        return MCT(lines[:-1], lines[-1])
    if op in _GATE_ARITY:
        if len(lines) != _GATE_ARITY[op]:
            raise ParseError(f"{op} requires {_GATE_ARITY[op]} lines", lineno, col)
        if op == "v":
            return V(lines[0], lines[1])
        if op == "v+":
            return Vdag(lines[0], lines[1])
        if op == "swap":
            return SWAP(lines[0], lines[1])
        return FREDKIN(lines[0], lines[1], lines[2])
    raise ParseError(f"unknown gate {op!r}", lineno, col)


def parse_blocks(text: str) -> list[Block]:
    blocks: list[Block] = []
    cur = Block()
    in_body = False
    started = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        head, _, rest = stripped.partition(" ")
        rest = rest.strip()
        if in_body:
            if stripped.upper() == "END":
                blocks.append(cur)
                cur, in_body, started = Block(), False, False
                continue
            if head == "use":
                parts = rest.split(None, 1)
                if len(parts) != 2:
                    raise ParseError("use requires a gate name and its lines", lineno, col)
                args = _split_names(parts[1])
                idx = {n: i for i, n in enumerate(cur.names)}
                for a in args:
                    if a not in idx:
                        raise ParseError(f"unknown line name {a!r}", lineno, col)
                cur.gates.append(CATALOG(parts[0], *(idx[a] for a in args)))
                continue
            idx = {n: i for i, n in enumerate(cur.names)}
            cur.gates.append(_parse_gate(head.lower(), _split_names(rest), idx, lineno, col))
            continue
        if stripped.upper() == "BEGIN":
            if not cur.names:
                raise ParseError("BEGIN before .v line declaration", lineno, col)
            in_body = True
            continue
        if not head.startswith("."):
            raise ParseError(f"expected a directive or BEGIN, got {head!r}", lineno, col)
        started = True
        d = head[1:]
        if d == "v":
            names = _split_names(rest)
            if len(set(names)) != len(names):
                dup = next(n for n in names if names.count(n) > 1)
                raise ParseError(f"duplicate line name {dup!r}", lineno, col)
            cur.names = names
        elif d == "c":
            cur.constants.update(_bit_assignments(rest, lineno, col))
        elif d == "g":
            cur.garbage.extend(_split_names(rest))
        elif d == "f":
            for item in _split_names(rest):
                if "->" not in item:
                    raise ParseError(f"feedback pair must be out->in, got {item!r}", lineno, col)
                out, inp = (s.strip() for s in item.split("->", 1))
                cur.feedback.append((out, inp))
        elif d == "init":
            cur.init.update(_bit_assignments(rest, lineno, col))
        elif d == "q":
            cur.output = rest
        elif d == "name":
            cur.name = rest
        elif d == "target":
            cur.target = rest
        elif d == "table":
            try:
                cur.table = [int(x) for x in _split_names(rest)]
            except ValueError:
                raise ParseError("table rows must be integers", lineno, col) from None
        elif d == "inverse":
            cur.inverse = rest
        elif d == "ancilla":
            cur.ancilla.extend(_split_names(rest))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, col)
        for ref in list(cur.constants) + cur.garbage + [x for p in cur.feedback for x in p] + list(cur.init):
            if cur.names and ref not in cur.names:
                raise ParseError(f"unknown line name {ref!r}", lineno, col)
    if in_body:
        raise ParseError("missing END", len(text.splitlines()) or 1)
    if started:
        raise ParseError("directives after the last END", len(text.splitlines()) or 1)
    return blocks


def block_to_design(b: Block):
    c = b.circuit()
    if not b.feedback:
        return c
    from revseq.sequential import FeedbackCircuit

    idx = {n: i for i, n in enumerate(b.names)}
    pairs = tuple((idx[o], idx[i]) for o, i in b.feedback)
    init = tuple(sorted((idx[k], v) for k, v in b.init.items()))
    out = idx[b.output] if b.output else None
    return FeedbackCircuit(c, pairs, init, out)


def parse_circuit(text: str):
    """Parse a single-block file into a Circuit, or a FeedbackCircuit when ``.f`` is present."""
    blocks = parse_blocks(text)
    if len(blocks) != 1:
        raise ParseError(f"expected exactly one circuit block, found {len(blocks)}", 1)
    return block_to_design(blocks[0])


# -- emission -------------------------------------------------------------------


def _gate_text(g: Gate, names: list[str] | tuple[str, ...]) -> str:
    nm = lambda xs: ",".join(names[x] for x in xs)  # noqa: E731
    if g.kind is Kind.X:
        return f"t{len(g.controls) + 1} {nm(g.controls + g.targets)}"
    if g.kind is Kind.V:
        return f"v {nm(g.controls + g.targets)}"
    if g.kind is Kind.VDAG:
        return f"v+ {nm(g.controls + g.targets)}"
    if g.kind is Kind.SWAP:
        return f"swap {nm(g.targets)}"
    if g.kind is Kind.FREDKIN:
        return f"f3 {nm(g.controls + g.targets)}"
    return f"use {g.name} {nm(g.targets)}"


def emit_circuit(design, name: str | None = None, extra: list[str] | None = None) -> str:
    """Canonical text for a Circuit or FeedbackCircuit."""
    from revseq.sequential import FeedbackCircuit

    fb = design if isinstance(design, FeedbackCircuit) else None
    c: Circuit = fb.core if fb else design
    names = list(c.names) or list(default_names(c.width))
    out = []
    if name:
        out.append(f".name {name}")
    out.extend(extra or [])
    out.append(".v " + ",".join(names))
    if c.constants:
        out.append(".c " + ",".join(f"{names[k]}={v}" for k, v in c.constants))
    if c.garbage:
        out.append(".g " + ",".join(names[k] for k in sorted(c.garbage)))
    if fb:
        out.append(".f " + ",".join(f"{names[o]}->{names[i]}" for o, i in fb.feedback))
        nonzero = [(k, v) for k, v in fb.initial_state if v]
        if nonzero:
            out.append(".init " + ",".join(f"{names[k]}={v}" for k, v in nonzero))
        if fb.output_line is not None and fb.output_line != fb.feedback[0][0]:
            out.append(f".q {names[fb.output_line]}")
    out.append("BEGIN")
    out.extend(_gate_text(g, names) for g in c.gates)
    out.append("END")
    return "\n".join(out) + "\n"


# -- truth tables ---------------------------------------------------------------


def parse_truth_table(text: str):
    """Rows ``input -> output`` in binary, line 0 = MSB, one per line.

    Every input word must appear exactly once; inputs may be listed in any
    order.  The output width may differ from the input width.
    """
    from revseq.synthesis import TruthTable

    rows: dict[int, int] = {}
    n_in = n_out = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise ParseError("expected 'input -> output'", lineno)
        lhs, rhs = (s.strip() for s in line.split("->", 1))
        for part, col in ((lhs, 1), (rhs, raw.index("->") + 3)):
            if not part or set(part) - {"0", "1"}:
                raise ParseError(f"{part!r} is not a binary word", lineno, col)
        if n_in is None:
            n_in, n_out = len(lhs), len(rhs)
        if len(lhs) != n_in or len(rhs) != n_out:
            raise ParseError(f"row width differs from first row ({n_in} -> {n_out})", lineno)
        x = int(lhs, 2)
        if x in rows:
            raise ParseError(f"input {lhs} listed twice", lineno)
        rows[x] = int(rhs, 2)
    if n_in is None:
        raise ParseError("empty truth table", 1)
    if len(rows) != 1 << n_in:
        missing = next(x for x in range(1 << n_in) if x not in rows)
        raise ParseError(f"input {missing:0{n_in}b} missing", len(text.splitlines()) or 1)
    return TruthTable(n_in, n_out, tuple(rows[x] for x in range(1 << n_in)))


def emit_truth_table(t) -> str:
    return "".join(f"{x:0{t.n_in}b} -> {y:0{t.n_out}b}\n" for x, y in enumerate(t.rows))
