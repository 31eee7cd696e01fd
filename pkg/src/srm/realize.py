"""Realisability with set register machines, checked by sampling.

A realizer is a program together with parameters; applying it to ``x`` runs
the program on ``params + [x]`` and returns R0.  When an application must
itself act as a realizer, its value is read as a *realizer code*
``<code of the program, sequence of the parameters>`` and decoded.

Realizers that build other realizers at run time do so from *templates*:
a template's program receives its dynamic values first, then the codes of
the templates it instantiates ("statics"), then the input.  ``U`` is a
self-reproducing realizer (``U(x) = U``) that realizes every true formula
built from atoms with conjunction, implication and universal quantifiers.

The checker is a falsifier.  ``Refuted`` is definitive: it carries the
clause path and inputs of a concrete violation and can be replayed.
``NotRefuted`` only means no violation was found on the sample: unbounded
universal quantifiers range over ``domain_sample`` and implications are
tested against a pool of antecedent realizers.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from . import hfset as hf
from .asm import AsmError, MacroProgram, Program, decode_program, encode_program, expand_macros
from .delta0 import JumpCompiler, NotDelta0, eval_delta0
from .hfset import EMPTY, HfSet
from .lang import (
    And,
    BExists,
    BForall,
    Bot,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Imp,
    In,
    Or,
    Var,
    free_vars,
    iff,
    is_delta0,
    parse_setformula,
    print_formula,
    substitute,
)
from .stdlib.build import P as stdlib_program
from .stdlib.build import Gen
from .vm import DEFAULT_LIMITS, RunError, RunLimits, run_as_function


class RealizeError(Exception):
    pass


class NotARealizer(RealizeError):
    pass


class UnknownName(KeyError):
    pass


# --- realizers and their codes ------------------------------------------------------


@dataclass(frozen=True)
class Realizer:
    program: Union[Program, MacroProgram]
    params: tuple = ()

    @property
    def code(self) -> HfSet:
        return realizer_code(self)

    def apply(self, x: HfSet, limits: RunLimits = DEFAULT_LIMITS) -> HfSet:
        return run_as_function(self.program, (*self.params, x), limits=limits)


@functools.lru_cache(maxsize=None)
def realizer_code(r: Realizer) -> HfSet:
    program = expand_macros(r.program, len(r.params) + 1)
    return hf.ordered_pair(encode_program(program), hf.make_sequence(r.params))


_decoded: dict[HfSet, Realizer] = {}


@functools.lru_cache(maxsize=4096)
def _decode_pc(pc: HfSet) -> Program:
    return decode_program(pc)


def decode_realizer(code: HfSet) -> Realizer:
    r = _decoded.get(code)
    if r is None:
        try:
            pc, seq = hf.proj1(code), hf.proj2(code)
            r = Realizer(_decode_pc(pc), tuple(hf.sequence_values(seq)))
        except (hf.HfError, AsmError) as exc:
            raise NotARealizer(f"not a realizer code: {exc}") from None
        _decoded[code] = r
    return r


# --- templates --------------------------------------------------------------------------

# name -> value handed to programs as a static parameter: the program code of a
# template, or (for "U") the full realizer code of U
_STATIC: dict[str, HfSet] = {}


class TGen(Gen):
    """Program builder for a template: registers are dyn..., statics..., input."""

    def __init__(self, n_dyn: int, statics: Sequence[str]):
        super().__init__(n_dyn + len(statics) + 1)
        self.dyn = list(range(n_dyn))
        self.st = {name: n_dyn + i for i, name in enumerate(statics)}
        self.x = n_dyn + len(statics)

    def numeral(self, k: int) -> int:
        r = self.fresh()
        self.emit("ZERO", r)
        for _ in range(k):
            self.emit("ADD", r, r)
        return r

    def sequence_code(self, pc: int, values: Sequence[int]) -> int:
        seq, n = self.fresh(), self.fresh()
        self.emit("ZERO", seq)
        self.emit("ZERO", n)
        for v in values:
            p = self.call(stdlib_program("opair"), [n, v])
            self.emit("ADD", p, seq)
            self.emit("ADD", n, n)
        return self.call(stdlib_program("opair"), [pc, seq])

    def closure(self, t: "Template", values: Sequence[int]) -> int:
        """Register holding the realizer code of ``t`` instantiated at ``values``."""
        if len(values) != t.n_dyn:
            raise RealizeError(f"{t.name} takes {t.n_dyn} dynamic values")
        return self.sequence_code(self.st[t.name], [*values, *(self.st[s] for s in t.statics)])

    def invoke(self, t: "Template", values: Sequence[int]) -> int:
        """Run ``t`` inline (its input is ignored by convention)."""
        dummy = self.fresh()
        return self.call(t.program, [*values, *(self.st[s] for s in t.statics), dummy])

    def const_u(self) -> int:
        r = self.fresh()
        self.emit("COPY", self.st["U"], r)
        return r


def _dedup(names) -> tuple:
    return tuple(dict.fromkeys(names))


class Template:
    """A family of realizers differing only in ``n_dyn`` leading parameters.

    ``builds`` are templates whose closures the body constructs, ``inlines``
    templates it runs inline; both determine the statics the program needs.
    """

    def __init__(
        self,
        name: str,
        n_dyn: int,
        body: Callable[[TGen], None],
        builds: Sequence["Template"] = (),
        inlines: Sequence["Template"] = (),
        needs_u: bool = False,
    ):
        if name in _STATIC and name != "U":
            raise RealizeError(f"template {name} defined twice")
        self.name = name
        self.n_dyn = n_dyn
        names = []
        for t in builds:
            names += [t.name, *t.statics]
        for t in inlines:
            names += list(t.statics)
        if needs_u:
            names.append("U")
        self.statics = _dedup(names)
        g = TGen(n_dyn, self.statics)
        body(g)
        self.program = g.finish()
        arity = n_dyn + len(self.statics) + 1
        _STATIC[name] = encode_program(expand_macros(self.program, arity))

    def realizer(self, *dyn: HfSet) -> Realizer:
        if len(dyn) != self.n_dyn:
            raise RealizeError(f"{self.name} takes {self.n_dyn} dynamic values")
        return Realizer(self.program, (*dyn, *(_STATIC[s] for s in self.statics)))

    def __repr__(self) -> str:
        return f"Template({self.name})"


def _u_body(g: TGen):
    # U has one parameter, its own program code; it returns <pc, (pc)>
    g.ret(g.sequence_code(0, [0]))


_U_PROGRAM = Template("U_program", 1, _u_body).program
U = Realizer(_U_PROGRAM, (_STATIC["U_program"],))
_STATIC["U"] = U.code


def _pair_body(g: TGen):
    second = g.label("second")
    g.jez(g.x, second)
    g.ret(1)
    g.place(second)
    g.ret(0)


def _id_body(g: TGen):
    g.ret(g.x)


# PAIRT(a, b): returns a on input #0 and b otherwise
PAIRT = Template("pair", 2, _pair_body)
ID_T = Template("id", 0, _id_body)
ID = ID_T.realizer()


# --- realizers synthesized from Δ₀ formulas ---------------------------------------------

_counter = itertools.count()
_synth_cache: dict[tuple, Template] = {}


def _fresh_name(kind: str) -> str:
    return f"{kind}_{next(_counter)}"


def _children(f: Formula, env: tuple) -> list:
    """Templates whose closures the realizer code for ``f`` builds."""
    if isinstance(f, (And, Or)):
        return _children(f.left, env) + _children(f.right, env)
    if isinstance(f, BExists):
        return _children(f.body, env + (f.var,))
    if isinstance(f, Imp):
        return [closure_template(f.right, env)]
    if isinstance(f, BForall):
        return [_forall_template(f, env)]
    return []


def _emit_real(g: TGen, jc: JumpCompiler, f: Formula, env: dict, names: tuple) -> int:
    """Emit code leaving in a register a realizer code for ``f`` (valid if ``f`` is true)."""
    if isinstance(f, (Eq, In, Bot)):
        return g.const_u()
    if isinstance(f, And):
        c0 = _emit_real(g, jc, f.left, env, names)
        c1 = _emit_real(g, jc, f.right, env, names)
        return g.closure(PAIRT, [c0, c1])
    if isinstance(f, Or):
        out = g.fresh()
        left, right, done = g.label("left"), g.label("right"), g.label("done")
        jc.test(f.left, env, left, right)
        for lab, sel, sub in ((left, 0, f.left), (right, 1, f.right)):
            g.place(lab)
            c = _emit_real(g, jc, sub, env, names)
            v = g.closure(PAIRT, [g.numeral(sel), c])
            g.emit("COPY", v, out)
            g.goto(done)
        g.place(done)
        return out
    if isinstance(f, BExists):
        out = g.const_u()
        it, x = g.fresh(), g.fresh()
        g.emit("COPY", jc.reg(f.bound, env), it)
        top, found, done = g.label("top"), g.label("found"), g.label("done")
        g.place(top)
        g.jez(it, done)
        g.emit("TAKE", it, x)
        g.emit("REMOVE", x, it)
        inner_env = {**env, f.var: x}
        jc.test(f.body, inner_env, found, top)
        g.place(found)
        cb = _emit_real(g, jc, f.body, inner_env, names + (f.var,))
        inner = g.closure(PAIRT, [g.const_u(), cb])
        v = g.closure(PAIRT, [x, inner])
        g.emit("COPY", v, out)
        g.place(done)
        return out
    if isinstance(f, Imp):
        t = closure_template(f.right, names)
        return g.closure(t, [env[n] for n in names])
    if isinstance(f, BForall):
        t = _forall_template(f, names)
        return g.closure(t, [env[n] for n in names])
    raise NotDelta0(f"cannot synthesize a realizer for {type(f).__name__}")


def closure_template(f: Formula, names: Sequence[str]) -> Template:
    """Template over ``names`` whose application (to anything) returns a
    realizer code for ``f`` at those values; the code realizes ``f`` whenever
    ``f`` is true there.
    """
    names = tuple(names)
    if not is_delta0(f):
        raise NotDelta0(print_formula(f))
    key = ("closure", f, names)
    t = _synth_cache.get(key)
    if t is None:

        def body(g: TGen):
            jc = JumpCompiler(g)
            jc.prologue(f)
            env: dict = {}
            for i, n in enumerate(names):
                env[n] = i
            g.ret(_emit_real(g, jc, f, env, names))

        t = Template(_fresh_name("delta0"), len(names), body, builds=[PAIRT, *_children(f, names)], needs_u=True)
        _synth_cache[key] = t
    return t


def _forall_template(f: BForall, names: tuple) -> Template:
    # outer(names)(b) = closure of "b in bound -> body" at names + b, which
    # ignores the antecedent realizer
    key = ("forall", f, names)
    t = _synth_cache.get(key)
    if t is None:
        inner = closure_template(f.body, names + (f.var,))

        def body(g: TGen):
            g.ret(g.closure(inner, [*g.dyn, g.x]))

        t = Template(_fresh_name("bforall"), len(names), body, builds=[inner])
        _synth_cache[key] = t
    return t


def synthesize(f: Formula, limits: RunLimits = DEFAULT_LIMITS) -> Realizer:
    """A realizer for the closed Δ₀ formula ``f`` (genuine when ``f`` is true)."""
    if free_vars(f):
        raise RealizeError(f"formula is not closed: {print_formula(f)}")
    code = closure_template(f, ()).realizer().apply(EMPTY, limits)
    return decode_realizer(code)


# --- the axioms and their realizers -------------------------------------------------------


def _pair_formula(p: str, y: str, z: str) -> Formula:
    """Δ₀ formula saying p = <y, z> = {{y}, {y, z}}."""
    V = Var
    sing = And(In(V(y), V("q")), BForall("w", V("q"), Eq(V("w"), V(y))))
    dbl = And(
        And(In(V(y), V("q")), In(V(z), V("q"))),
        BForall("w", V("q"), Or(Eq(V("w"), V(y)), Eq(V("w"), V(z)))),
    )
    return And(
        And(BExists("q", V(p), sing), BExists("q", V(p), dbl)),
        BForall("q", V(p), Or(sing, dbl)),
    )


SEPARATION_PHI = parse_setformula("exists w in z . forall v in w . bot")


def _axioms() -> dict[str, Formula]:
    V = Var
    union_body = iff(In(V("x"), V("u")), BExists("y", V("a"), In(V("x"), V("y"))))
    sep_body = iff(In(V("z"), V("y")), And(In(V("z"), V("x")), SEPARATION_PHI))
    choice_ante = BForall("y", V("x"), BExists("z", V("y"), Eq(V("z"), V("z"))))
    choice_cons = Exists("f", BForall("y", V("x"), BExists("z", V("y"), BExists("p", V("f"), _pair_formula("p", "y", "z")))))
    return {
        "empty_set": parse_setformula("exists x . forall y . y in x -> bot"),
        "pairing": parse_setformula("forall a . forall b . exists c . a in c /\\ b in c"),
        "union": Forall("a", Exists("u", Forall("x", union_body))),
        "delta0_separation": Forall("x", Exists("y", Forall("z", sep_body))),
        "ac": Forall("x", Imp(choice_ante, choice_cons)),
        "powerset": Forall("a", Exists("p", Forall("x", iff(In(V("x"), V("p")), BForall("y", V("x"), In(V("y"), V("a"))))))),
    }


AXIOMS = _axioms()


def _pairing(corrupt: bool):
    def inner(g: TGen):
        c = g.fresh()
        g.emit("ADD", 0, c)
        if not corrupt:
            g.emit("ADD", g.x, c)
        g.ret(g.closure(PAIRT, [c, g.const_u()]))

    t2 = Template(f"pairing_b{'_bad' if corrupt else ''}", 1, inner, builds=[PAIRT], needs_u=True)
    t1 = Template(f"pairing_a{'_bad' if corrupt else ''}", 0, lambda g: g.ret(g.closure(t2, [g.x])), builds=[t2])
    return t1.realizer()


def _union(corrupt: bool):
    tag = "_bad" if corrupt else ""

    def forward(g: TGen):
        # dyn (a, x): find y in a with x in y
        a, x = g.dyn
        found = g.label("found")
        y, top, end = g.loop(a)
        g.jmem(x, y, found)
        g.close(top, end)
        g.ret(g.const_u())
        g.place(found)
        g.ret(g.closure(PAIRT, [y, g.const_u()]))

    fwd = Template(f"union_fwd{tag}", 2, forward, builds=[PAIRT], needs_u=True)

    def per_x(g: TGen):
        f = g.closure(fwd, [0, g.x])
        g.ret(g.closure(PAIRT, [f, g.const_u()]))

    t2 = Template(f"union_x{tag}", 1, per_x, builds=[fwd, PAIRT], needs_u=True)

    def top_(g: TGen):
        u = g.fresh() if corrupt else g.call(stdlib_program("bigunion"), [g.x])
        g.ret(g.closure(PAIRT, [u, g.closure(t2, [g.x])]))

    return Template(f"union{tag}", 0, top_, builds=[t2, PAIRT]).realizer()


def _separation(corrupt: bool, phi: Formula = SEPARATION_PHI, var: str = "z"):
    tag = "_bad" if corrupt else ""
    rphi = closure_template(phi, (var,))

    def fwd_body(g: TGen):
        r = g.invoke(rphi, [0])
        g.ret(g.closure(PAIRT, [g.const_u(), r]))

    fwd = Template(f"sep_fwd{tag}", 1, fwd_body, builds=[PAIRT], inlines=[rphi], needs_u=True)

    def per_z(g: TGen):
        g.ret(g.closure(PAIRT, [g.closure(fwd, [g.x]), g.const_u()]))

    t2 = Template(f"sep_z{tag}", 0, per_z, builds=[fwd, PAIRT], needs_u=True)

    def top_(g: TGen):
        y = g.fresh()
        if corrupt:
            g.emit("COPY", g.x, y)
        else:
            jc = JumpCompiler(g)
            jc.prologue(phi)
            z, top, end = g.loop(g.x)
            keep = g.label("keep")
            jc.test(phi, {var: z}, keep, top)
            g.place(keep)
            g.emit("ADD", z, y)
            g.close(top, end)
        g.ret(g.closure(PAIRT, [y, g.closure(t2, [])]))

    return Template(f"separation{tag}", 0, top_, builds=[t2, PAIRT]).realizer()


def _choice(corrupt: bool):
    tag = "_bad" if corrupt else ""
    _, cons = AXIOMS["ac"].body.left, AXIOMS["ac"].body.right
    rb = closure_template(cons.body, ("x", "f"))

    def per_s(g: TGen):
        x = 0
        f = g.fresh() if corrupt else g.call(stdlib_program("choice_fn"), [x])
        r = g.invoke(rb, [x, f])
        g.ret(g.closure(PAIRT, [f, r]))

    t2 = Template(f"ac_s{tag}", 1, per_s, builds=[PAIRT], inlines=[rb])
    return Template(f"ac{tag}", 0, lambda g: g.ret(g.closure(t2, [g.x])), builds=[t2]).realizer()


def _powerset():
    def body(g: TGen):
        p = g.fresh()
        g.emit("POW", g.x, p)
        g.ret(g.closure(PAIRT, [p, g.const_u()]))

    return Template("powerset", 0, body, builds=[PAIRT], needs_u=True).realizer()


@functools.lru_cache(maxsize=None)
def _build(name: str) -> Realizer:
    if name == "empty_set":
        return PAIRT.realizer(EMPTY, ID.code)
    if name == "empty_set_nonempty":
        return PAIRT.realizer(hf.numeral(1), ID.code)
    if name in ("pairing", "pairing_singleton"):
        return _pairing(name != "pairing")
    if name in ("union", "union_empty"):
        return _union(name != "union")
    if name in ("delta0_separation", "separation_identity"):
        return _separation(name != "delta0_separation")
    if name in ("ac", "ac_empty"):
        return _choice(name != "ac")
    if name == "powerset":
        return _powerset()
    raise UnknownName(name)


AXIOM_REALIZERS = ("empty_set", "pairing", "union", "delta0_separation", "ac", "powerset")

# corrupted realizer -> the axiom it pretends to realize
CORRUPTED = {
    "empty_set_nonempty": "empty_set",
    "pairing_singleton": "pairing",
    "union_empty": "union",
    "separation_identity": "delta0_separation",
    "ac_empty": "ac",
}


def get_axiom_realizer(name: str) -> Realizer:
    if name not in AXIOM_REALIZERS and name not in CORRUPTED:
        raise UnknownName(name)
    return _build(name)


def axiom_formula(name: str) -> Formula:
    try:
        return AXIOMS[CORRUPTED.get(name, name)]
    except KeyError:
        raise UnknownName(name) from None


# --- the checker -------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckContext:
    domain_sample: tuple
    implication_pool: tuple = ()
    limits: RunLimits = DEFAULT_LIMITS
    depth_budget: int = 16
    # also try a synthesized realizer for true Δ₀ antecedents
    synthesize_antecedents: bool = True

    def __post_init__(self):
        if not self.domain_sample:
            raise ValueError("domain_sample must be nonempty")


def standard_context(limits: RunLimits = DEFAULT_LIMITS) -> CheckContext:
    """All 16 sets of rank at most 3, with U and the identity as antecedent pool."""
    return CheckContext(tuple(hf.v_stage(4)), (U, ID), limits)


@dataclass(frozen=True)
class Refuted:
    path: tuple
    reason: str
    refuted = True

    def __str__(self) -> str:
        steps = " ".join(_format_step(s) for s in self.path) or "(top)"
        return f"refuted at {steps}: {self.reason}"


@dataclass(frozen=True)
class NotRefuted:
    applications: int
    refuted = False

    def __str__(self) -> str:
        return f"not refuted ({self.applications} applications; sampled check, not a proof)"


Verdict = Union[Refuted, NotRefuted]


def _short(a: HfSet, width: int = 60) -> str:
    """HF literal, elided when it would not fit on a line."""
    text = hf.format_hf(a)
    if len(text) <= width:
        return text
    return f"<set of rank {hf.rank(a)} with {len(a)} members>"


def _short_formula(f: Formula) -> str:
    if isinstance(f, (Eq, In)):
        op = "=" if isinstance(f, Eq) else "in"
        return f"{_short(f.left.value)} {op} {_short(f.right.value)}"
    return print_formula(f)


def _format_step(step) -> str:
    kind, arg = step
    if kind == "and":
        return f"and[{arg}]"
    if kind == "imp":
        return "imp[<realizer>]"
    return f"{kind}[{_short(arg)}]"


class _Fail(Exception):
    pass


def _unfold(f: Formula) -> Formula:
    """Bounded quantifiers as abbreviations: ∀x∈a φ is ∀x(x∈a → φ), ∃x∈a φ is ∃x(x∈a ∧ φ)."""
    if isinstance(f, BForall):
        return Forall(f.var, Imp(In(Var(f.var), f.bound), f.body))
    if isinstance(f, BExists):
        return Exists(f.var, And(In(Var(f.var), f.bound), f.body))
    return f


def _instantiate(f: Union[Exists, Forall], value: HfSet) -> Formula:
    return substitute(f.body, {f.var: Const(value)})


def _atomic_true(f: Formula) -> bool:
    left, right = f.left, f.right
    if not isinstance(left, Const) or not isinstance(right, Const):
        raise RealizeError(f"formula is not closed: {print_formula(f)}")
    if isinstance(f, Eq):
        return left.value is right.value
    return hf.is_member(left.value, right.value)


class _Checker:
    def __init__(self, ctx: CheckContext):
        self.ctx = ctx
        self.applications = 0
        self._synth: dict[Formula, Optional[HfSet]] = {}

    def app(self, rcode: HfSet, x: HfSet) -> HfSet:
        self.applications += 1
        try:
            r = decode_realizer(rcode)
        except NotARealizer as exc:
            raise _Fail(str(exc)) from None
        try:
            return r.apply(x, self.ctx.limits)
        except RunError as exc:
            raise _Fail(f"application did not halt: {exc.outcome}") from None

    def antecedents(self, f: Formula) -> list:
        """Realizer codes to feed an implication with antecedent ``f``."""
        delta0 = is_delta0(f) and not free_vars(f)
        if delta0 and not eval_delta0(f, {}):
            return []  # a false Δ₀ sentence has no realizer
        out = []
        for s in self.ctx.implication_pool:
            if isinstance(self.go(s.code, f, (), 1), NotRefuted):
                out.append(s.code)
        if delta0 and self.ctx.synthesize_antecedents:
            if f not in self._synth:
                self._synth[f] = synthesize(f, self.ctx.limits).code
            out.append(self._synth[f])
        return list(dict.fromkeys(out))

    def go(self, rcode: HfSet, f: Formula, path: tuple, depth: int) -> Verdict:
        if depth > self.ctx.depth_budget:
            return NotRefuted(self.applications)
        f = _unfold(f)
        try:
            if isinstance(f, (Eq, In)):
                if not _atomic_true(f):
                    return Refuted(path, f"atomic formula {_short_formula(f)} is false")
            elif isinstance(f, Bot):
                return Refuted(path, "bot has no realizer")
            elif isinstance(f, And):
                for i, sub in enumerate((f.left, f.right)):
                    step = path + (("and", i),)
                    v = self._descend(rcode, hf.numeral(i), sub, step, depth)
                    if v.refuted:
                        return v
            elif isinstance(f, Or):
                try:
                    sel = self.app(rcode, hf.numeral(0))
                except _Fail as exc:
                    return Refuted(path + (("or", EMPTY),), str(exc))
                n = hf.to_natural(sel)
                if n not in (0, 1):
                    return Refuted(path + (("bad-selector", sel),), f"selector {_short(sel)} is not #0 or #1")
                return self._descend(rcode, hf.numeral(1), (f.left, f.right)[n], path + (("or", sel),), depth)
            elif isinstance(f, Imp):
                for s in self.antecedents(f.left):
                    v = self._descend(rcode, s, f.right, path + (("imp", s),), depth)
                    if v.refuted:
                        return v
            elif isinstance(f, Exists):
                step = path + (("exists", EMPTY),)
                try:
                    w = self.app(rcode, hf.numeral(0))
                except _Fail as exc:
                    return Refuted(step, str(exc))
                return self._descend(rcode, hf.numeral(1), _instantiate(f, w), path + (("exists", w),), depth)
            elif isinstance(f, Forall):
                for a in self.ctx.domain_sample:
                    v = self._descend(rcode, a, _instantiate(f, a), path + (("forall", a),), depth)
                    if v.refuted:
                        return v
            else:
                raise RealizeError(f"no realisability clause for {type(f).__name__}")
        except _Fail as exc:  # pragma: no cover - every application is guarded above
            return Refuted(path, str(exc))
        return NotRefuted(self.applications)

    def _descend(self, rcode, arg, sub, path, depth) -> Verdict:
        try:
            nxt = self.app(rcode, arg)
        except _Fail as exc:
            return Refuted(path, str(exc))
        return self.go(nxt, sub, path, depth + 1)


def check(r: Union[Realizer, HfSet], f: Formula, ctx: CheckContext) -> Verdict:
    """Search for a violation of ``r`` realizing the closed formula ``f``."""
    if free_vars(f):
        raise RealizeError(f"formula is not closed: {print_formula(f)}")
    code = r.code if isinstance(r, Realizer) else r
    checker = _Checker(ctx)
    v = checker.go(code, f, (), 0)
    return NotRefuted(checker.applications) if not v.refuted else v


def replay(r: Union[Realizer, HfSet], f: Formula, verdict: Refuted, limits: RunLimits = DEFAULT_LIMITS) -> bool:
    """Re-run the recorded clause path; True iff the violation recurs."""
    checker = _Checker(CheckContext((EMPTY,), (), limits))
    cur = r.code if isinstance(r, Realizer) else r
    g = f
    path = verdict.path
    i = 0
    try:
        for i, (kind, arg) in enumerate(path):
            g = _unfold(g)
            last = i == len(path) - 1
            if kind == "and":
                cur = checker.app(cur, hf.numeral(arg))
                g = (g.left, g.right)[arg]
            elif kind in ("or", "bad-selector"):
                sel = checker.app(cur, hf.numeral(0))
                n = hf.to_natural(sel)
                if n not in (0, 1):
                    return last and kind == "bad-selector" and sel is arg
                if sel is not arg:
                    return False
                cur = checker.app(cur, hf.numeral(1))
                g = (g.left, g.right)[n]
            elif kind == "imp":
                cur = checker.app(cur, arg)
                g = g.right
            elif kind == "exists":
                w = checker.app(cur, hf.numeral(0))
                if w is not arg:
                    return False
                cur = checker.app(cur, hf.numeral(1))
                g = _instantiate(g, w)
            elif kind == "forall":
                cur = checker.app(cur, arg)
                g = _instantiate(g, arg)
            else:
                return False
    except _Fail:
        return i == len(path) - 1  # only the final step may fail to halt
    g = _unfold(g)
    if isinstance(g, Bot):
        return True
    if isinstance(g, (Eq, In)):
        return not _atomic_true(g)
    return False
