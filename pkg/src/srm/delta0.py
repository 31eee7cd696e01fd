"""Δ₀ formulas over HF: a native evaluator, bounded Σ₁ witness search, and
a compiler from Δ₀ formulas to set register programs.

The compiler works by structural recursion with jump targets: the code for a
subformula jumps to a "true" or a "false" label.  Bounded quantifiers copy
the bound into a scratch register and take/remove its members one by one.
Argument registers are only read, so a subformula can be re-evaluated inside
loops and conjunctions.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import hfset as hf
from .asm import MacroProgram
from .hfset import HfSet
from .lang import (
    BOT,
    And,
    BExists,
    BForall,
    Bot,
    Const,
    Eq,
    Exists,
    Formula,
    Imp,
    In,
    LangError,
    Or,
    Var,
    free_vars,
    is_delta0,
    print_formula,
)
from .stdlib.build import Gen


class NotDelta0(LangError):
    pass


class UnboundVariable(LangError):
    pass


Env = Mapping[str, HfSet]


def _value(t, env: Env) -> HfSet:
    if isinstance(t, Const):
        return t.value
    try:
        return env[t.name]
    except KeyError:
        raise UnboundVariable(t.name) from None


def _eval(f: Formula, env: Env) -> bool:
    if isinstance(f, Eq):
        return _value(f.left, env) is _value(f.right, env)
    if isinstance(f, In):
        return hf.is_member(_value(f.left, env), _value(f.right, env))
    if isinstance(f, Bot):
        return False
    if isinstance(f, And):
        return _eval(f.left, env) and _eval(f.right, env)
    if isinstance(f, Or):
        return _eval(f.left, env) or _eval(f.right, env)
    if isinstance(f, Imp):
        return not _eval(f.left, env) or _eval(f.right, env)
    if isinstance(f, (BExists, BForall)):
        bound = _value(f.bound, env)
        test = any if isinstance(f, BExists) else all
        return test(_eval(f.body, {**env, f.var: x}) for x in bound)
    raise NotDelta0(f"unbounded or non-set formula node {type(f).__name__}")


def eval_delta0(f: Formula, env: Env) -> bool:
    """Truth of the Δ₀ formula ``f`` in HF under ``env``."""
    if not is_delta0(f):
        raise NotDelta0(print_formula(f))
    return _eval(f, env)


@dataclass(frozen=True)
class Sigma1Result:
    """``found`` with a witness assignment, or unknown (nothing found in budget)."""

    found: bool
    witness: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.found

    def __str__(self) -> str:
        if not self.found:
            return "unknown"
        parts = ", ".join(f"{k}={hf.format_hf(v)}" for k, v in self.witness.items())
        return f"true ({parts})" if parts else "true"


UNKNOWN = Sigma1Result(False)


def split_sigma1(f: Formula) -> tuple[list[str], Formula]:
    """Leading unbounded existentials and the remaining matrix."""
    names = []
    while isinstance(f, Exists):
        names.append(f.var)
        f = f.body
    return names, f


def eval_sigma1(f: Formula, env: Env, search_bound: int) -> Sigma1Result:
    """Search witnesses among the first ``search_bound`` sets in TAKE order.

    Sound but incomplete: a found witness satisfies the matrix; otherwise the
    answer is unknown.  With several leading quantifiers every combination
    of candidates is tried.
    """
    names, matrix = split_sigma1(f)
    if not is_delta0(matrix):
        raise NotDelta0(print_formula(f))
    candidates = [hf.f_tau(i) for i in range(search_bound)]
    for combo in itertools.product(candidates, repeat=len(names)):
        local = dict(env)
        local.update(zip(names, combo))
        if _eval(matrix, local):
            return Sigma1Result(True, dict(zip(names, combo)))
    return UNKNOWN


# --- compiler ---------------------------------------------------------------------


def _constants(f: Formula, out: dict) -> None:
    for t in (getattr(f, "left", None), getattr(f, "right", None), getattr(f, "bound", None)):
        if isinstance(t, Const):
            out.setdefault(t.value, None)
    for child in (getattr(f, "left", None), getattr(f, "right", None), getattr(f, "body", None)):
        if isinstance(child, Formula):
            _constants(child, out)


class JumpCompiler:
    """Emits Δ₀ tests into a :class:`Gen` as jumps to "true"/"false" labels.

    ``env`` maps variable names to registers; constants must be materialized
    with :meth:`prologue` before any test code that uses them.
    """

    def __init__(self, g: Gen):
        self.g = g
        self.consts: dict[HfSet, int] = {}

    def prologue(self, f: Formula) -> None:
        found: dict = {}
        _constants(f, found)
        for value in sorted(found):
            self.build_const(value)

    def build_const(self, value: HfSet) -> int:
        reg = self.consts.get(value)
        if reg is None:
            members = [self.build_const(x) for x in value]
            reg = self.g.fresh()
            for m in members:
                self.g.emit("ADD", m, reg)
            self.consts[value] = reg
        return reg

    def reg(self, t, env: dict) -> int:
        if isinstance(t, Const):
            return self.consts[t.value]
        try:
            return env[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None

    def test(self, f: Formula, env: dict, yes, no) -> None:
        g = self.g
        if isinstance(f, Bot):
            g.goto(no)
        elif isinstance(f, Eq):
            g.jeq(self.reg(f.left, env), self.reg(f.right, env), yes)
            g.goto(no)
        elif isinstance(f, In):
            g.jmem(self.reg(f.left, env), self.reg(f.right, env), yes)
            g.goto(no)
        elif isinstance(f, (And, Or, Imp)):
            mid = g.label("mid")
            if isinstance(f, And):
                self.test(f.left, env, mid, no)
            elif isinstance(f, Or):
                self.test(f.left, env, yes, mid)
            else:
                self.test(f.left, env, mid, yes)
            g.place(mid)
            self.test(f.right, env, yes, no)
        elif isinstance(f, (BExists, BForall)):
            bound = self.reg(f.bound, env)
            it, x = g.fresh(), g.fresh()
            g.emit("COPY", bound, it)
            top = g.label("top")
            g.place(top)
            exists = isinstance(f, BExists)
            g.jez(it, no if exists else yes)
            g.emit("TAKE", it, x)
            g.emit("REMOVE", x, it)
            inner = {**env, f.var: x}
            if exists:
                self.test(f.body, inner, yes, top)
            else:
                self.test(f.body, inner, top, no)
        else:
            raise NotDelta0(f"cannot compile {type(f).__name__}")


def compile_delta0(f: Formula, args: Sequence[str]) -> MacroProgram:
    """Program deciding ``f``: argument ``args[i]`` is read from register i,
    the answer (#1 or #0) is left in R0.  Argument registers other than R0
    are never written.
    """
    if not is_delta0(f):
        raise NotDelta0(print_formula(f))
    missing = free_vars(f) - set(args)
    if missing:
        raise UnboundVariable(", ".join(sorted(missing)))
    if len(set(args)) != len(args):
        raise ValueError("argument names must be distinct")
    g = Gen(len(args))
    c = JumpCompiler(g)
    c.prologue(f)
    yes, no = g.label("yes"), g.label("no")
    c.test(f, {name: i for i, name in enumerate(args)}, yes, no)
    g.place(no)
    g.emit("ZERO", 0)
    g.goto(g.exit)
    g.place(yes)
    g.set_true(0)
    return g.finish()


# --- random formulas and the differential fuzz ---------------------------------------------


def random_delta0(rng: random.Random, depth: int, variables: Sequence[str], constants: bool = True) -> Formula:
    """Seeded random Δ₀ formula of nesting depth at most ``depth``.

    Atoms compare variables in scope (occasionally a small constant);
    bounded quantifiers bind a new variable bounded by one in scope.
    """
    variables = list(variables)
    counter = itertools.count()

    def term(scope):
        if constants and rng.random() < 0.15:
            return Const(hf.numeral(rng.randrange(3)))
        return Var(rng.choice(scope))

    def go(d, scope):
        if d <= 0 or rng.random() < 0.25:
            r = rng.random()
            if r < 0.05:
                return BOT
            return (Eq if r < 0.35 else In)(term(scope), term(scope))
        kind = rng.randrange(5)
        if kind < 3:
            node = (And, Or, Imp)[kind]
            return node(go(d - 1, scope), go(d - 1, scope))
        name = f"z{next(counter)}"
        bound = Var(rng.choice(scope))
        node = BExists if kind == 3 else BForall
        return node(name, bound, go(d - 1, scope + [name]))

    return go(depth, variables)


@dataclass
class FuzzReport:
    cases: int
    mismatches: list = field(default_factory=list)
    seconds: float = 0.0

    def __str__(self) -> str:
        return f"delta0 fuzz: cases={self.cases} mismatches={len(self.mismatches)} time={self.seconds:.2f}s"


def fuzz(cases: int, seed: int = 0, depth: int = 3, max_rank: int = 3, arity: int = 2) -> FuzzReport:
    """Compare compiled programs with :func:`eval_delta0` on random formulas."""
    from .vm import Halted, run

    rng = random.Random(seed)
    names = [f"x{i}" for i in range(arity)]
    report = FuzzReport(cases)
    start = time.perf_counter()
    for _ in range(cases):
        f = random_delta0(rng, depth, names)
        args = [hf.random_hf(rng, max_rank) for _ in names]
        expected = hf.numeral(int(eval_delta0(f, dict(zip(names, args)))))
        outcome, _ = run(compile_delta0(f, names), args, record=False)
        got = outcome.value if isinstance(outcome, Halted) else outcome
        if got is not expected:
            report.mismatches.append((print_formula(f), args, expected, got))
    report.seconds = time.perf_counter() - start
    return report
