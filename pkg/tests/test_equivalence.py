import pytest

from conftest import naive_perm
from revseq.circuit import C, CATALOG, FREDKIN, MCT, N, T, Circuit, Kind, relabel_circuit, simulate_permutation
from revseq.equivalence import (
    CertificationError,
    Registry,
    UnknownGate,
    check_claimed_function,
    compare_designs,
    default_registry,
    expand_to_nct,
    load_registry,
)
from revseq.sequential import builtin
from revseq.synthesis import TruthTable

REG = default_registry()
NOR = TruthTable.from_function(2, 1, lambda a, b: 1 - (a | b))
NAND = TruthTable.from_function(2, 1, lambda a, b: 1 - (a & b))


def bits(x, n):
    return [(x >> (n - 1 - i)) & 1 for i in range(n)]


# tables written from the defining equations, independent of the data file
DEFINITIONS = {
    "fredkin": (3, lambda a, b, c: (a, b if not a else c, c if not a else b)),
    "new-gate": (3, lambda a, b, c: (a, (a & b) ^ c, ((1 - a) & (1 - c)) ^ (1 - b))),
    "modified-toffoli": (3, lambda a, b, c: (a, b, (a | b) ^ c)),
    "modified-fredkin": (3, lambda a, b, c: (a, ((1 - a) & b) | (a & (1 - c)), ((1 - a) & c) | (a & (1 - b)))),
    "cccnot": (4, lambda a, b, c, d: (a, b, c, d ^ (a & b & c))),
}


@pytest.mark.parametrize("name", sorted(DEFINITIONS))
def test_registry_tables_match_definitions(name):
    n, fn = DEFINITIONS[name]
    want = TruthTable.from_function(n, n, fn).rows
    e = REG.get(name)
    assert e.semantic_table.map == want
    assert e.nct_count == len(e.nct_circuit)


def test_expansion_counts():
    assert REG.get("fredkin").nct_count == 3
    assert REG.get("modified-toffoli").nct_count == 3
    assert REG.get("modified-fredkin").nct_count == 4
    cc = REG.get("cccnot")
    assert cc.toffoli_count == 3 and cc.nct_count == 3 and cc.ancillas == 1


def test_new_gate_needs_five():
    # exhaustive BFS over 3-line NCT circuits: no circuit with 4 or fewer gates realizes it
    n = 3
    gates = []
    for t in range(n):
        others = [x for x in range(n) if x != t]
        gates += [N(t)] + [C(c, t) for c in others] + [T(*others, t)]
    perms = [tuple(simulate_permutation(Circuit(3, (g,))).map) for g in gates]
    target = REG.get("new-gate").semantic_table.map
    frontier = {tuple(range(8))}
    seen = set(frontier)
    for depth in range(1, 5):
        nxt = set()
        for p in frontier:
            for q in perms:
                r = tuple(q[p[x]] for x in range(8))
                if r not in seen:
                    seen.add(r)
                    nxt.add(r)
        frontier = nxt
        assert target not in seen, depth
    assert REG.get("new-gate").nct_count == 5


def test_expand_fredkin():
    out = expand_to_nct(Circuit(3, (FREDKIN(0, 1, 2),)))
    assert len(out) == 3
    assert naive_perm(out) == naive_perm(Circuit(3, (FREDKIN(0, 1, 2),)))


def test_expand_cccnot_with_ancilla():
    c = Circuit(4, (CATALOG("cccnot", 0, 1, 2, 3),))
    out = expand_to_nct(c)
    assert out.width == 5 and len(out) == 3
    assert all(g.kind is Kind.X and len(g.controls) == 2 for g in out.gates)
    assert out.constants == ((4, 0),)
    ref = naive_perm(Circuit(4, (MCT((0, 1, 2), 3),)))
    got = naive_perm(out)
    for x in range(16):
        assert got[x << 1] == ref[x] << 1


def test_expand_nct_unchanged():
    c = Circuit(3, (N(0), C(0, 1), T(0, 1, 2)))
    assert expand_to_nct(c).gates == c.gates


def test_expand_unknown_gate():
    with pytest.raises(UnknownGate):
        expand_to_nct(Circuit(3, (CATALOG("no-such-gate", 0, 1, 2),)))


def test_expand_preserves_semantics_for_every_entry():
    for e in REG:
        if e.ancillas:
            continue
        c = Circuit(e.arity, (CATALOG(e.name, *range(e.arity)),))
        assert naive_perm(expand_to_nct(c)) == list(e.semantic_table.map)


def test_register_rejects_mismatch():
    reg = Registry()
    with pytest.raises(CertificationError):
        reg.register_expansion("bad", 2, table=(0, 1, 3, 2), nct_circuit=Circuit(2, (C(1, 0),)))
    with pytest.raises(CertificationError):
        reg.register_expansion("dup", 2, table=(0, 0, 1, 2))


def test_register_from_table_synthesizes():
    reg = Registry()
    e = reg.register_expansion("swap", 2, table=(0, 2, 1, 3))
    assert naive_perm(e.nct_circuit) == [0, 2, 1, 3]


def test_load_registry_rejects_bad_block():
    text = ".name x\n.v a,b\n.table 0,1,3,2\nBEGIN\nt2 b,a\nEND\n"
    with pytest.raises(CertificationError):
        load_registry(text)


def test_modified_toffoli_nor_claim():
    mt = REG.get("modified-toffoli")
    bad = check_claimed_function(mt, NOR, {2: 0}, [2])
    assert not bad
    # the output is A+B instead of NOR
    x, got, want = bad.counterexample
    assert got == 1 - want
    assert check_claimed_function(mt, NOR, {2: 1}, [2])


def test_toffoli_nand_claim():
    reg = Registry()
    e = reg.register_expansion("toffoli", 3, nct_circuit=Circuit(3, (T(0, 1, 2),)))
    assert check_claimed_function(e, NAND, {2: 1}, [2])


def test_claim_arity_mismatch():
    with pytest.raises(ValueError):
        check_claimed_function(REG.get("modified-toffoli"), NOR, {}, [2])


def test_compare_single_design():
    rep = compare_designs([("sr", builtin("sr-latch"))])
    assert len(rep.rows) == 1
    r = rep.rows[0].report
    assert r.total_cost == r.nct_count + r.quantum_cost + r.garbage
    assert r.feedback_loops == 1


def test_compare_fredkin_forms():
    rep = compare_designs(
        [
            ("fredkin", Circuit(3, (FREDKIN(0, 1, 2),))),
            ("ctc", Circuit(3, (C(2, 1), T(0, 1, 2), C(2, 1)))),
        ]
    )
    assert rep.row("fredkin").report.quantum_cost == rep.row("ctc").report.quantum_cost == 5


def test_compare_relabeled_designs_identical():
    a = builtin("jk-latch").core
    b = relabel_circuit(a, [2, 0, 1])
    rep = compare_designs([("a", a), ("b", b)])
    assert rep.row("a").report == rep.row("b").report


def test_compare_winners_stable_under_reordering():
    designs = [
        ("sr", builtin("sr-latch")),
        ("d", builtin("d-latch")),
        ("t", builtin("t-latch")),
    ]
    w1 = compare_designs(designs).winners()
    w2 = compare_designs(designs[::-1]).winners()
    assert w1 == w2


def test_compare_pipeline_preserves_semantics():
    for name in ("sr-latch", "jk-latch", "gated-sr"):
        f = builtin(name)
        rep = compare_designs([(name, f)])
        assert naive_perm(rep.rows[0].optimized) == naive_perm(expand_to_nct(f.core))
