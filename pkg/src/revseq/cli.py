"""Command-line front end.

Exit status: 0 success/pass, 1 verification failure, 2 usage or parse error.
Every subcommand that reads a circuit accepts ``-`` for standard input, so
``revseq lib sr-latch | revseq verify-seq - --spec sr`` works.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from revseq.circuit import Circuit, CircuitError, validate_circuit
from revseq.fileformat import (
    ParseError,
    emit_circuit,
    parse_circuit,
    parse_truth_table,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def _load_design(path: str):
    design = parse_circuit(_read(path))
    core = getattr(design, "core", design)
    problems = validate_circuit(core)
    if problems:
        raise UsageError(f"{path}: " + "; ".join(map(str, problems)))
    return design


def _registry(args):
    if getattr(args, "registry", None):
        from revseq.equivalence import default_registry, load_registry

        # user entries extend the built-ins
        base = default_registry()
        from revseq.equivalence import Registry

        return load_registry(_read(args.registry), Registry(list(base)))
    return None


def _catalog(args):
    if getattr(args, "catalog", None):
        from revseq.qcost import Catalog, default_catalog, load_catalog

        return Catalog(list(default_catalog()) + list(load_catalog(_read(args.catalog))))
    return None


def _emit_pairs(pairs: list[tuple[str, object]], out) -> None:
    for k, v in pairs:
        print(f"{k}: {v}", file=out)


# -- subcommands ----------------------------------------------------------------


def cmd_sim(args, out) -> int:
    from revseq.sequential import FeedbackCircuit, run_sequence

    design = _load_design(args.file)
    if isinstance(design, FeedbackCircuit):
        vectors = [tuple(int(ch) for ch in v) for v in args.inputs.split(",")] if args.inputs else []
        tr = run_sequence(design, vectors)
        n = design.width
        names = design.core.names
        print(f"# inputs: {','.join(names[i] for i in design.input_lines)}; "
              f"state: {','.join(names[i] for i in design.state_lines)}", file=out)
        for t, s in enumerate(tr.steps):
            ins = "".join(map(str, s.inputs))
            print(f"{t}: {ins}  {s.before:0{n}b} -> {s.after:0{n}b}  Q={s.q}", file=out)
        print("state: " + "".join(map(str, tr.final_state)), file=out)
        return EXIT_OK
    c: Circuit = design
    if all(g.is_classical for g in c.gates):
        from revseq.circuit import simulate_permutation

        perm = simulate_permutation(c).map
    else:
        from revseq.unitary import circuit_unitary

        u = circuit_unitary(c)
        if not u.is_permutation():
            print("# not a permutation; nonzero entries (row, col): value", file=out)
            for r in range(u.dim):
                for col in range(u.dim):
                    e = u.entry(r, col)
                    if e.re or e.im:
                        print(f"{r:0{c.width}b} {col:0{c.width}b}: {e}", file=out)
            return EXIT_OK
        perm = [int(u.re[:, x].argmax()) for x in range(u.dim)]
    for x, y in enumerate(perm):
        print(f"{x:0{c.width}b} -> {y:0{c.width}b}", file=out)
    return EXIT_OK


def cmd_synth(args, out) -> int:
    from revseq.synthesis import SynthConfig, synth_pipeline

    table = parse_truth_table(_read(args.file))
    algos = ("basic", "bidirectional") if args.algorithm == "both" else (args.algorithm,)
    consts = tuple(int(v) for v in args.constants.split(",")) if args.constants else None
    cfg = SynthConfig(
        algorithms=algos,
        optimize=not args.no_optimize,
        extra_lines=args.extra_lines,
        constant_values=consts,
    )
    res = synth_pipeline(table, cfg)
    extra = [f"# {k}: {v}" for k, v in res.report.as_dict().items()]
    out.write(emit_circuit(res.circuit, name=args.name, extra=extra))
    return EXIT_OK


def cmd_opt(args, out) -> int:
    from revseq.optimizer import load_templates, optimize
    from revseq.sequential import FeedbackCircuit
    from dataclasses import replace

    design = _load_design(args.file)
    core = design.core if isinstance(design, FeedbackCircuit) else design
    lib = load_templates(_read(args.templates)) if args.templates else None
    if lib is not None:
        from revseq.optimizer import default_templates

        lib = default_templates() + lib
    opt, trace = optimize(core, lib)
    result = replace(design, core=opt) if isinstance(design, FeedbackCircuit) else opt
    text = emit_circuit(result)
    for e in trace:
        print(f"# {e.pass_name} [{e.span[0]}..{e.span[1]}] {e.before} -> {e.after}", file=sys.stderr)
    print(f"# gates: {len(core)} -> {len(opt)}", file=sys.stderr)
    if args.in_place and args.file != "-":
        Path(args.file).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_qcost(args, out) -> int:
    from revseq.qcost import cost_report, quantum_cost

    design = _load_design(args.file)
    rep = cost_report(design, catalog=_catalog(args), registry=_registry(args))
    _emit_pairs(list(rep.as_dict().items()), out)
    if args.format == "text":
        core = getattr(design, "core", design)
        qc = quantum_cost(core, _catalog(args), _registry(args))
        print(f"# method: {qc.method} (rewrite reaches {qc.rewrite_cost})", file=out)
        print(f"# witness: {qc.witness}", file=out)
    return EXIT_OK


def cmd_verify_seq(args, out) -> int:
    from revseq.sequential import FeedbackCircuit, get_spec, verify_flipflop, verify_latch

    design = _load_design(args.file)
    if not isinstance(design, FeedbackCircuit):
        raise UsageError("verify-seq needs a design with .f feedback pairs")
    mode = args.mode
    if mode == "auto":
        fed = {o for o, _ in design.feedback}
        mode = "flipflop" if design.clock_line is not None and design.q_line not in fed else "latch"
    spec = get_spec(args.spec, clocked=design.clock_line is not None)
    if mode == "flipflop":
        v = verify_flipflop(design, spec, args.horizon)
    else:
        v = verify_latch(design, spec, args.horizon)
    _emit_pairs(
        [
            ("verdict", "pass" if v.ok else "fail"),
            ("mode", mode),
            ("bijective", "yes" if v.bijective else "no"),
            ("sequences", v.checked),
        ],
        out,
    )
    if not v.ok:
        print(f"counterexample: {v.message}", file=out)
    return EXIT_OK if v.ok else EXIT_FAIL


def cmd_compare(args, out) -> int:
    from revseq.equivalence import METRICS, compare_designs

    designs = [(Path(p).stem if p != "-" else "stdin", _load_design(p)) for p in args.files]
    rep = compare_designs(designs, registry=_registry(args))
    keys = ["NCT", "NCV", "G", "QC", "TC", "FB"]
    if args.format == "kv":
        for r in rep.rows:
            for k, v in r.report.as_dict().items():
                print(f"{r.name}.{k}: {v}", file=out)
    else:
        w = max(len(r.name) for r in rep.rows)
        print(f"{'design':<{w}}  " + "  ".join(f"{k:>4}" for k in keys), file=out)
        for r in rep.rows:
            d = r.report.as_dict()
            print(f"{r.name:<{w}}  " + "  ".join(f"{d[k]:>4}" for k in keys), file=out)
    for m, names in rep.winners().items():
        label = dict(zip(METRICS, keys))[m]
        print(f"best.{label}: {','.join(names)}", file=out)
    return EXIT_OK


def cmd_lib(args, out) -> int:
    from revseq.sequential import builtin, builtin_names

    if args.list or not args.name:
        for n in builtin_names():
            print(n, file=out)
        return EXIT_OK
    try:
        design = builtin(args.name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    out.write(emit_circuit(design, name=args.name))
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revseq", description="Reversible circuit synthesis, optimization and costing.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sim", help="print a circuit's permutation, or a feedback design's trace")
    s.add_argument("file")
    s.add_argument("--inputs", help="comma-separated input vectors for feedback designs, e.g. 10,00,01")
    s.set_defaults(func=cmd_sim)

    s = sub.add_parser("synth", help="synthesize an NCT circuit from a truth table")
    s.add_argument("file", help="rows 'input -> output' in binary")
    s.add_argument("--algorithm", choices=("basic", "bidirectional", "both"), default="both")
    s.add_argument("--extra-lines", type=int, default=0, help="constant input lines to add (default 0)")
    s.add_argument("--constants", help="comma-separated constant values for the extra lines (default all 0)")
    s.add_argument("--no-optimize", action="store_true")
    s.add_argument("--name")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("opt", help="optimize a circuit; rewrite trace goes to stderr")
    s.add_argument("file")
    s.add_argument("--in-place", action="store_true")
    s.add_argument("--templates", help="extra template file (certified on load)")
    s.set_defaults(func=cmd_opt)

    s = sub.add_parser("qcost", help="print the cost report")
    s.add_argument("file")
    s.add_argument("--format", choices=("text", "kv"), default="text")
    s.add_argument("--catalog", help="extra catalog file")
    s.add_argument("--registry", help="extra registry file")
    s.set_defaults(func=cmd_qcost)

    s = sub.add_parser("verify-seq", help="check a latch or flip-flop against a spec")
    s.add_argument("file")
    s.add_argument("--spec", required=True, choices=("sr", "d", "jk", "t"))
    s.add_argument("--horizon", type=int, default=4)
    s.add_argument("--mode", choices=("auto", "latch", "flipflop"), default="auto")
    s.set_defaults(func=cmd_verify_seq)

    s = sub.add_parser("compare", help="expand, optimize and cost several designs")
    s.add_argument("files", nargs="+")
    s.add_argument("--format", choices=("text", "kv"), default="text")
    s.add_argument("--registry", help="extra registry file")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("lib", help="emit a built-in design")
    s.add_argument("name", nargs="?")
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_lib)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args, out)
    except (ParseError, UsageError, CircuitError) as exc:
        print(f"revseq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"revseq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
