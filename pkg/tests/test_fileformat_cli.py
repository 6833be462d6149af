import io
import re

import pytest

from revseq.circuit import C, FREDKIN, N, SWAP, T, V, Circuit, Vdag, CATALOG
from revseq.cli import main
from revseq.fileformat import ParseError, emit_circuit, emit_truth_table, parse_blocks, parse_circuit, parse_truth_table
from revseq.sequential import FeedbackCircuit, builtin, builtin_names
from revseq.synthesis import TruthTable

TOFFOLI = ".v a,b,c\nBEGIN\nt3 a,b,c\nEND\n"
FREDKIN_FILE = ".v a,b,c\nBEGIN\nf3 a,b,c\nEND\n"
CTC_FILE = ".v a,b,c\nBEGIN\nt2 c,b\nt3 a,b,c\nt2 c,b\nEND\n"


def run(argv, stdin=None, monkeypatch=None):
    out = io.StringIO()
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(argv, out)
    return code, out.getvalue()


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- parsing --------------------------------------------------------------------


def test_parse_toffoli():
    c = parse_circuit(TOFFOLI)
    assert c.width == 3 and c.gates == (T(0, 1, 2),)
    assert c.names == ("a", "b", "c")


def test_parse_all_gate_kinds():
    text = ".v a,b,c\n# comment\nBEGIN\nt1 a\nt2 a,b\nv a,b\nv+ b,c\nswap a,c\nf3 a,b,c\nuse fredkin a,b,c\nEND\n"
    c = parse_circuit(text)
    assert c.gates == (N(0), C(0, 1), V(0, 1), Vdag(1, 2), SWAP(0, 2), FREDKIN(0, 1, 2), CATALOG("fredkin", 0, 1, 2))


def test_parse_directives():
    c = parse_circuit(".v a,b,c\n.c c=1\n.g a,b\nBEGIN\nt3 a,b,c\nEND\n")
    assert c.constants == ((2, 1),) and c.garbage == frozenset({0, 1})


def test_parse_feedback():
    f = parse_circuit(".v s,r,q,qin\n.f q->qin\nBEGIN\nt2 s,q\nEND\n")
    assert isinstance(f, FeedbackCircuit)
    assert f.feedback == ((2, 3),)


@pytest.mark.parametrize(
    "text, message",
    [
        (".v a,b\nBEGIN\nt2 a\nEND\n", "CNOT requires 2 lines"),
        (".v a,b\n.bogus x\nBEGIN\nEND\n", "unknown directive"),
        (".v a,a\nBEGIN\nEND\n", "duplicate line name"),
        (".v a,b\nBEGIN\nt2 a,z\nEND\n", "unknown line name"),
        (".v a,b\nBEGIN\nt2 a,b\n", "missing END"),
        (".v a,b\nBEGIN\nq a\nEND\n", "unknown gate"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_circuit(text)


def test_parse_error_is_located():
    with pytest.raises(ParseError) as exc:
        parse_circuit(".v a,b\nBEGIN\nt1 a\nt2 a\nEND\n")
    assert exc.value.line == 4


@pytest.mark.parametrize("name", builtin_names())
def test_round_trip_byte_stable(name):
    text = emit_circuit(builtin(name), name=name)
    again = emit_circuit(parse_circuit(text), name=name)
    assert again == text


def test_round_trip_plain_circuit():
    c = Circuit(3, (C(2, 1), V(1, 2), Vdag(0, 1), SWAP(0, 2), T(0, 1, 2)), ("x", "y", "z"), ((2, 0),), frozenset({0}))
    text = emit_circuit(c)
    assert parse_circuit(text) == c
    assert emit_circuit(parse_circuit(text)) == text


def test_multiple_blocks():
    blocks = parse_blocks(TOFFOLI + "\n" + FREDKIN_FILE)
    assert len(blocks) == 2
    with pytest.raises(ParseError):
        parse_circuit(TOFFOLI + FREDKIN_FILE)


def test_truth_table_round_trip():
    text = "00 -> 0\n01 -> 0\n10 -> 0\n11 -> 1\n"
    t = parse_truth_table(text)
    assert t == TruthTable.from_function(2, 1, lambda a, b: a & b)
    assert parse_truth_table(emit_truth_table(t)) == t


@pytest.mark.parametrize(
    "text, message",
    [
        ("00 -> 0\n01 -> 0\n10 -> 0\n", "missing"),
        ("00 -> 0\n00 -> 1\n", "listed twice"),
        ("0x -> 0\n", "binary"),
        ("00 0\n", "input -> output"),
        ("", "empty"),
    ],
)
def test_truth_table_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_truth_table(text)


# -- command line ---------------------------------------------------------------


def test_qcost_toffoli(tmp_path):
    code, out = run(["qcost", write(tmp_path, "t.rev", TOFFOLI)])
    assert code == 0 and "QC: 5" in out.splitlines()


def test_qcost_kv_one_key_per_metric(tmp_path):
    code, out = run(["qcost", "--format", "kv", write(tmp_path, "t.rev", TOFFOLI)])
    keys = [line.split(":")[0] for line in out.splitlines()]
    assert code == 0 and keys == ["NCT", "NCV", "G", "QC", "TC", "FB"]


def test_lib_pipe_verify(monkeypatch):
    code, text = run(["lib", "sr-latch"])
    assert code == 0
    code, out = run(["verify-seq", "-", "--spec", "sr", "--horizon", "4"], text, monkeypatch)
    assert code == 0 and "verdict: pass" in out


def test_verify_failure_exit_one(monkeypatch):
    # a D latch whose input is renamed t does not toggle
    _, text = run(["lib", "d-latch"])
    text = re.sub(r"\bd\b", "t", text.replace("d-latch", "x"))
    code, out = run(["verify-seq", "-", "--spec", "t"], text, monkeypatch)
    assert code == 1 and "verdict: fail" in out


def test_verify_input_name_mismatch_is_usage_error(monkeypatch):
    _, text = run(["lib", "d-latch"])
    assert run(["verify-seq", "-", "--spec", "t"], text, monkeypatch)[0] == 2


def test_compare_fredkin_forms(tmp_path):
    a = write(tmp_path, "fredkin.rev", FREDKIN_FILE)
    b = write(tmp_path, "ctc.rev", CTC_FILE)
    code, out = run(["compare", "--format", "kv", a, b])
    assert code == 0
    qc = [line for line in out.splitlines() if ".QC:" in line and not line.startswith("best")]
    assert len(qc) == 2 and {line.split(":")[-1].strip() for line in qc} == {"5"}


def test_compare_output_order_follows_input(tmp_path):
    a = write(tmp_path, "fredkin.rev", FREDKIN_FILE)
    b = write(tmp_path, "ctc.rev", CTC_FILE)
    _, ab = run(["compare", a, b])
    _, ba = run(["compare", b, a])
    assert ab.index("fredkin") < ab.index("ctc") and ba.index("ctc") < ba.index("fredkin")


def test_sim_permutation(tmp_path):
    code, out = run(["sim", write(tmp_path, "t.rev", TOFFOLI)])
    assert code == 0 and "110 -> 111" in out and "111 -> 110" in out


def test_sim_feedback_trace(monkeypatch):
    _, text = run(["lib", "sr-latch"])
    code, out = run(["sim", "-", "--inputs", "10,11,01"], text, monkeypatch)
    assert code == 0 and out


def test_synth_and(tmp_path):
    tt = write(tmp_path, "and.tt", "00 -> 0\n01 -> 0\n10 -> 0\n11 -> 1\n")
    code, out = run(["synth", tt, "--extra-lines", "1"])
    assert code == 0
    c = parse_circuit(out)
    assert c.gates == (T(0, 1, 2),)


def test_synth_infeasible_is_usage_error(tmp_path):
    tt = write(tmp_path, "and.tt", "00 -> 0\n01 -> 0\n10 -> 0\n11 -> 1\n")
    assert run(["synth", tt])[0] == 2


def test_opt_in_place(tmp_path):
    p = write(tmp_path, "f.rev", ".v a,b,c\nBEGIN\nt3 a,b,c\nt3 a,c,b\nt3 a,b,c\nEND\n")
    code, _ = run(["opt", "--in-place", p])
    assert code == 0
    c = parse_circuit(open(p).read())
    assert sorted(g.label for g in c.gates) == ["C", "C", "T"]


def test_parse_error_exit_two(tmp_path):
    assert run(["qcost", write(tmp_path, "bad.rev", ".v a,b\nBEGIN\nt2 a\nEND\n")])[0] == 2


def test_missing_file_and_bad_args(tmp_path):
    assert run(["qcost", str(tmp_path / "nope.rev")])[0] == 2
    assert run(["frobnicate"])[0] == 2
    assert run(["lib", "no-such-design"])[0] == 2


def test_lib_list():
    code, out = run(["lib", "--list"])
    assert code == 0 and set(out.split()) == set(builtin_names())
