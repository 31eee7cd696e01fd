"""Command-line entry point: ``srm <command> ...``.

Exit status is 0 on success, 1 when the answer is a semantic failure (a run
that does not halt, a rejected trace, a refuted realizer, a countermodel)
and 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import beth, delta0, realize, stdlib
from . import hfset as hf
from .asm import AsmError, assemble, check_valid, decode_program, disassemble, encode_program, expand_macros
from .lang import (
    LangError,
    free_vars,
    parse_prop,
    parse_setformula,
    print_formula,
    print_prop,
    visser_atom_names,
    visser_rule,
)
from .vm import Halted, RunLimits, check_trace, format_trace, parse_oracle_table, parse_trace, run


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _limits(args) -> RunLimits:
    try:
        base = RunLimits.from_env()
        changes = {
            "max_steps": args.max_steps,
            "max_limit_jumps": args.max_limits,
            "max_powerset_input": args.max_pow,
        }
        return dataclasses.replace(base, **{k: v for k, v in changes.items() if v is not None})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _inputs(values: Optional[Sequence[str]]) -> list:
    return [hf.parse_hf(v) for v in values or ()]


def _oracle(path: Optional[str]):
    return parse_oracle_table(_read(path)) if path else None


# --- commands ---------------------------------------------------------------------


def cmd_asm(args) -> int:
    mp = assemble(_read(args.file))
    check_valid(mp)
    print(hf.format_hf(encode_program(expand_macros(mp, args.reserve))))
    return 0


def cmd_dis(args) -> int:
    print(disassemble(decode_program(hf.parse_hf(_read(args.file).strip()))), end="")
    return 0


def cmd_run(args) -> int:
    mp = assemble(_read(args.file))
    check_valid(mp)
    outcome, trace = run(mp, _inputs(args.inputs), _oracle(args.oracle), _limits(args), record=bool(args.trace))
    if args.trace:
        Path(args.trace).write_text(format_trace(trace))
    print(f"outcome: {outcome}")
    if isinstance(outcome, Halted):
        print(f"R0: {hf.format_hf(outcome.value)}")
        return 0
    return 1


def cmd_check_trace(args) -> int:
    mp = assemble(_read(args.program))
    trace = parse_trace(_read(args.trace))
    inputs = _inputs(args.inputs) if args.inputs is not None else None
    ok = check_trace(mp, trace, _oracle(args.oracle), inputs, _limits(args))
    print("accepted" if ok else "rejected")
    return 0 if ok else 1


def cmd_stdlib(args) -> int:
    limits = _limits(args)
    if args.action == "list":
        for name in stdlib.list_entries():
            e = stdlib.get(name)
            origin = "transcribed" if e.transcribed else "authored"
            print(f"{name:12} arity={e.arity} {e.flavor.name:4} {origin:11} {e.summary}")
        return 0
    if not args.name:
        raise UsageError(f"stdlib {args.action} needs an entry name")
    if args.name not in stdlib.list_entries() and not (args.action == "fuzz" and args.name == "all"):
        raise UsageError(f"unknown stdlib entry {args.name!r}")
    if args.action == "run":
        try:
            value = stdlib.run_entry(args.name, _inputs(args.inputs), limits)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        print(hf.format_hf(value))
        return 0
    names = stdlib.list_entries() if args.name == "all" else [args.name]
    failed = False
    for name in names:
        report = stdlib.differential_test(name, args.samples, args.max_rank, args.seed, limits)
        print(report)
        for case in report.mismatches[:5]:
            print("  mismatch:", " ".join(hf.format_hf(a) for a in case[0]), "->", case[2], "expected", case[1])
        failed |= not report.ok
    return 1 if failed else 0


def _env(pairs: Sequence[str]) -> dict:
    env = {}
    for item in pairs or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected name=<hf>, got {item!r}")
        env[name.strip()] = hf.parse_hf(value)
    return env


def cmd_delta0(args) -> int:
    if args.action == "fuzz":
        report = delta0.fuzz(args.cases, args.seed, args.depth, args.max_rank)
        print(report)
        return 1 if report.mismatches else 0
    if not args.formula:
        raise UsageError(f"delta0 {args.action} needs a formula")
    f = parse_setformula(args.formula)
    if args.action == "eval":
        env = _env(args.env)
        if delta0.split_sigma1(f)[0]:
            print(delta0.eval_sigma1(f, env, args.search_bound))
        else:
            print("true" if delta0.eval_delta0(f, env) else "false")
        return 0
    names = args.args or sorted(free_vars(f))
    print(disassemble(delta0.compile_delta0(f, names)), end="")
    return 0


def cmd_realize(args) -> int:
    if args.action == "list":
        for name in realize.AXIOM_REALIZERS:
            print(f"{name}: {print_formula(realize.axiom_formula(name))}")
        for name in realize.CORRUPTED:
            print(f"{name}: corrupted realizer for {realize.CORRUPTED[name]}")
        return 0
    ctx = realize.standard_context(_limits(args))
    if args.sample:
        ctx = dataclasses.replace(ctx, domain_sample=tuple(_inputs(args.sample)))
    jobs = []
    if args.realizer or args.formula:
        if not (args.realizer and args.formula) or args.names:
            raise UsageError("--realizer and --formula go together, without axiom names")
        r = realize.Realizer(assemble(_read(args.realizer)))
        jobs.append((args.realizer, r, parse_setformula(args.formula)))
    else:
        for name in args.names or list(realize.AXIOM_REALIZERS):
            try:
                jobs.append((name, realize.get_axiom_realizer(name), realize.axiom_formula(name)))
            except realize.UnknownName as exc:
                raise UsageError(f"unknown realizer {exc.args[0]!r}") from None
    refuted = False
    for name, r, f in jobs:
        verdict = realize.check(r, f, ctx)
        print(f"{name}: {verdict}")
        if verdict.refuted:
            refuted = True
            if args.replay:
                print(f"  replay: {'reproduced' if realize.replay(r, f, verdict, ctx.limits) else 'not reproduced'}")
    return 1 if refuted else 0


def cmd_beth(args) -> int:
    m = beth.parse_model(_read(args.model)) if args.model else None
    if args.action == "validate":
        problems = beth.validate_model(m)
        for d in problems:
            print(d)
        n = len(problems)
        print("valid" if not n else f"invalid ({n} problem{'s' if n > 1 else ''})")
        return 1 if problems else 0
    if not args.formula:
        raise UsageError(f"beth {args.action} needs a formula")
    f = parse_prop(args.formula)
    if args.action == "force":
        problems = beth.validate_model(m)
        if problems:
            print(f"model is invalid: {problems[0]}")
            return 1
        table = beth.force(m, f)
        states = m.states if args.all_states else [m.root]
        for s in states:
            label = "root" if s == m.root and not args.all_states else s
            print(f"{label}: {'forced' if table.forces(s, f) else 'not forced'}")
        if args.witness and table.forces(m.root, f):
            print(beth.bar_witness(m, m.root, f))
        return 0
    found = beth.countermodel_search(f, args.max_states, args.max_branching)
    if found is None:
        print("no countermodel within budget")
        return 0
    print(f"# countermodel for {print_prop(f)}")
    print(beth.format_model(found), end="")
    return 1


def cmd_visser(args) -> int:
    if args.n < 1:
        raise UsageError("n must be at least 1")
    a, c = visser_rule(args.n)
    names = visser_atom_names(args.n)
    print(f"V_{args.n}^a: {print_prop(a, names)}")
    print(f"V_{args.n}^c: {print_prop(c, names)}")
    return 0


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for random sampling (default 0)")
    common.add_argument("--max-steps", type=int, help="step budget per run")
    common.add_argument("--max-limits", type=int, help="limit-jump budget per run")
    common.add_argument("--max-pow", type=int, help="largest set POW may be applied to")

    p = argparse.ArgumentParser(prog="srm", description="Set register machines over hereditarily finite sets.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("asm", parents=[common], help="assemble a listing to its HF code")
    s.add_argument("file")
    s.add_argument("--reserve", type=int, default=0, help="input registers the macro scratch must avoid")
    s.set_defaults(func=cmd_asm)

    s = sub.add_parser("dis", parents=[common], help="disassemble an HF program code")
    s.add_argument("file")
    s.set_defaults(func=cmd_dis)

    s = sub.add_parser("run", parents=[common], help="run a listing")
    s.add_argument("file")
    s.add_argument("--in", dest="inputs", nargs="*", metavar="HF")
    s.add_argument("--oracle", metavar="TABLE")
    s.add_argument("--trace", metavar="OUT", help="write the run trace to OUT")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("check-trace", parents=[common], help="verify a run trace against a listing")
    s.add_argument("program")
    s.add_argument("trace")
    s.add_argument("--in", dest="inputs", nargs="*", metavar="HF")
    s.add_argument("--oracle", metavar="TABLE")
    s.set_defaults(func=cmd_check_trace)

    s = sub.add_parser("stdlib", parents=[common], help="library programs")
    s.add_argument("action", choices=["list", "run", "fuzz"])
    s.add_argument("name", nargs="?")
    s.add_argument("--in", dest="inputs", nargs="*", metavar="HF")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--max-rank", type=int, default=3)
    s.set_defaults(func=cmd_stdlib)

    s = sub.add_parser("delta0", parents=[common], help="bounded formulas")
    s.add_argument("action", choices=["eval", "compile", "fuzz"])
    s.add_argument("formula", nargs="?")
    s.add_argument("--env", nargs="*", metavar="NAME=HF")
    s.add_argument("--args", nargs="*", metavar="NAME", help="argument order for compile")
    s.add_argument("--search-bound", type=int, default=64)
    s.add_argument("--cases", type=int, default=500)
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--max-rank", type=int, default=3)
    s.set_defaults(func=cmd_delta0)

    s = sub.add_parser("realize", parents=[common], help="realisability falsifier")
    s.add_argument("action", choices=["check", "list"])
    s.add_argument("names", nargs="*")
    s.add_argument("--replay", action="store_true", help="re-run each refutation")
    s.add_argument("--formula", help="closed set formula to check a custom realizer against")
    s.add_argument("--realizer", metavar="FILE", help="listing of a custom realizer (no parameters)")
    s.add_argument("--sample", nargs="*", metavar="HF", help="domain sample (default: all sets of rank <= 3)")
    s.set_defaults(func=cmd_realize)

    s = sub.add_parser("beth", parents=[common], help="regular Beth models")
    s.add_argument("action", choices=["validate", "force", "search"])
    s.add_argument("model", nargs="?", help="model file (validate, force)")
    s.add_argument("formula", nargs="?")
    s.add_argument("--all-states", action="store_true")
    s.add_argument("--witness", action="store_true", help="print why the root forces the formula")
    s.add_argument("--max-states", type=int, default=3)
    s.add_argument("--max-branching", type=int, default=2)
    s.set_defaults(func=cmd_beth)

    s = sub.add_parser("visser", parents=[common], help="print a restricted Visser rule")
    s.add_argument("n", type=int)
    s.set_defaults(func=cmd_visser)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "beth" and args.action == "search":
        # search takes only a formula
        if args.formula is not None:
            parser.error("beth search takes a single formula")
        args.formula, args.model = args.model, None
    if args.command == "beth" and args.action != "search" and not args.model:
        parser.error(f"beth {args.action} needs a model file")
    try:
        return args.func(args)
    except (UsageError, AsmError, LangError, hf.HfError, beth.BethError, ValueError) as exc:
        print(f"srm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
