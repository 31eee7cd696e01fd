"""Generator for the library programs that have no published listing.

The transcribed listings (eq, union2, intersect2, vstage) are maintained by
hand in ``programs/``.  Everything else is written here with the label-aware
:class:`~srm.asm.Builder` and rendered to ``programs/<name>.srm`` by

    python -m srm.stdlib.build

A test checks that the shipped files match this module's output.
"""

from __future__ import annotations

import functools
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from ..asm import Builder, MacroProgram, assemble, disassemble

TRANSCRIBED = ("eq", "union2", "intersect2", "vstage")


@functools.lru_cache(maxsize=None)
def listing(name: str) -> MacroProgram:
    text = (resources.files("srm.stdlib") / "programs" / f"{name}.srm").read_text()
    return assemble(text)


class Gen(Builder):
    """Builder with loop and return helpers.  Inputs occupy R0..R(arity-1)."""

    def __init__(self, arity: int):
        super().__init__(reserved=max(arity, 1))
        self.exit = self.label("exit")

    def jez(self, r, target):
        self.emit("JEZ", r, target)

    def jmem(self, i, j, target):
        self.emit("JMEM", i, j, target)

    def jeq(self, i, j, target):
        self.emit("JEQ", i, j, target)

    def call(self, prog: MacroProgram, args, out: Optional[int] = None) -> int:
        out = self.fresh() if out is None else out
        self.inline(prog, args, out)
        return out

    def loop(self, src: int, copy: bool = True):
        """Open a take-and-remove loop over ``src`` (or a copy of it).

        Returns ``(elem, top, end)``; the body jumps to ``top`` to continue
        and :meth:`close` ends the loop.
        """
        it = self.fresh() if copy else src
        if copy:
            self.emit("COPY", src, it)
        elem = self.fresh()
        top, end = self.label("top"), self.label("end")
        self.place(top)
        self.jez(it, end)
        self.emit("TAKE", it, elem)
        self.emit("REMOVE", elem, it)
        return elem, top, end

    def close(self, top, end):
        self.goto(top)
        self.place(end)

    def ret(self, r: int):
        if r != 0:
            self.emit("COPY", r, 0)
        self.goto(self.exit)

    def finish(self) -> MacroProgram:
        self.place(self.exit)
        return self.build()


def predicate(arity: int, body: Callable[[Gen, object, object], None]) -> MacroProgram:
    """Program answering #1/#0; ``body`` must end by jumping to yes or no."""
    g = Gen(arity)
    yes, no = g.label("yes"), g.label("no")
    body(g, yes, no)
    g.place(no)
    g.emit("ZERO", 0)
    g.goto(g.exit)
    g.place(yes)
    g.set_true(0)
    return g.finish()


# --- constructors -------------------------------------------------------------------


def singleton() -> MacroProgram:
    g = Gen(1)
    r = g.fresh()
    g.emit("ADD", 0, r)
    g.ret(r)
    return g.finish()


def pair() -> MacroProgram:
    g = Gen(2)
    r = g.fresh()
    g.emit("ADD", 0, r)
    g.emit("ADD", 1, r)
    g.ret(r)
    return g.finish()


def opair() -> MacroProgram:
    g = Gen(2)
    a, b, r = g.fresh(), g.fresh(), g.fresh()
    g.emit("ADD", 0, a)
    g.emit("ADD", 0, b)
    g.emit("ADD", 1, b)
    g.emit("ADD", a, r)
    g.emit("ADD", b, r)
    g.ret(r)
    return g.finish()


def bigunion() -> MacroProgram:
    g = Gen(1)
    acc = g.fresh()
    x, top, end = g.loop(0, copy=False)
    y, top2, end2 = g.loop(x, copy=False)
    g.emit("ADD", y, acc)
    g.close(top2, end2)
    g.close(top, end)
    g.ret(acc)
    return g.finish()


def bigintersect() -> MacroProgram:
    # the empty family yields ∅ here; the native operation refuses it
    g = Gen(1)
    acc = g.fresh()
    g.jez(0, g.exit)
    g.emit("TAKE", 0, acc)
    g.emit("REMOVE", acc, 0)
    x, top, end = g.loop(0, copy=False)
    g.call(listing("intersect2"), [acc, x], out=acc)
    g.close(top, end)
    g.ret(acc)
    return g.finish()


def proj1() -> MacroProgram:
    g = Gen(1)
    t = g.call(P("bigintersect"), [0])
    r = g.fresh()
    g.emit("TAKE", t, r)
    g.ret(r)
    return g.finish()


def proj2() -> MacroProgram:
    g = Gen(1)
    u = g.call(P("bigunion"), [0])
    x = g.call(P("proj1"), [0])
    g.emit("REMOVE", x, u)
    same = g.label("same")
    g.jez(u, same)
    r = g.fresh()
    g.emit("TAKE", u, r)
    g.ret(r)
    g.place(same)
    g.ret(x)
    return g.finish()


def _is_opair(g: Gen, yes, no):
    g.jez(0, no)
    t = g.call(P("bigintersect"), [0])
    g.jez(t, no)
    x = g.fresh()
    g.emit("TAKE", t, x)
    u = g.call(P("bigunion"), [0])
    g.emit("REMOVE", x, u)
    y = g.fresh()
    g.emit("COPY", x, y)
    skip = g.label("skip")
    g.jez(u, skip)
    g.emit("TAKE", u, y)
    g.place(skip)
    q = g.call(P("opair"), [x, y])
    g.jeq(q, 0, yes)
    g.goto(no)


def _is_func(g: Gen, yes, no):
    seen = g.fresh()
    e, top, end = g.loop(0)
    ok = g.call(P("is_opair"), [e])
    g.jez(ok, no)
    x = g.call(P("proj1"), [e])
    g.jmem(x, seen, no)
    g.emit("ADD", x, seen)
    g.close(top, end)
    g.goto(yes)


def dom() -> MacroProgram:
    g = Gen(1)
    d = g.fresh()
    e, top, end = g.loop(0, copy=False)
    x = g.call(P("proj1"), [e])
    g.emit("ADD", x, d)
    g.close(top, end)
    g.ret(d)
    return g.finish()


def apply_fn() -> MacroProgram:
    # (f, x) -> f(x); ∅ when x is not in the domain
    g = Gen(2)
    found = g.label("found")
    e, top, end = g.loop(0, copy=False)
    k = g.call(P("proj1"), [e])
    g.jeq(k, 1, found)
    g.close(top, end)
    g.ret(g.fresh())
    g.place(found)
    g.ret(g.call(P("proj2"), [e]))
    return g.finish()


def _is_transitive(g: Gen, yes, no):
    y, top, end = g.loop(0)
    z, top2, end2 = g.loop(y)
    g.jmem(z, 0, top2)
    g.goto(no)
    g.place(end2)
    g.goto(top)
    g.place(end)
    g.goto(yes)


def _is_ordinal(g: Gen, yes, no):
    t = g.call(P("is_transitive"), [0])
    g.jez(t, no)
    y, top, end = g.loop(0)
    t = g.call(P("is_transitive"), [y])
    g.jez(t, no)
    g.close(top, end)
    g.goto(yes)


def _is_ordseq(g: Gen, yes, no):
    f = g.call(P("is_func"), [0])
    g.jez(f, no)
    d = g.call(P("dom"), [0])
    o = g.call(P("is_ordinal"), [d])
    g.jez(o, no)
    g.goto(yes)


def seq_proj() -> MacroProgram:
    # (s, α) -> s(α): plain function application
    g = Gen(2)
    g.ret(g.call(P("apply_fn"), [0, 1]))
    return g.finish()


def make_least_sat(pred: MacroProgram) -> MacroProgram:
    """``y -> `` the TAKE-least member of ``y`` satisfying ``pred`` (∅ if none)."""
    g = Gen(1)
    x, top, end = g.loop(0, copy=False)
    r = g.call(pred, [x])
    g.jez(r, top)
    g.ret(x)
    g.place(end)
    g.ret(g.fresh())
    return g.finish()


def least_sat() -> MacroProgram:
    return make_least_sat(P("is_opair"))


def pow_() -> MacroProgram:
    g = Gen(1)
    g.emit("POW", 0, 0)
    return g.finish()


def _is_pow(g: Gen, yes, no):
    # (x, y): is x the power set of y?
    t = g.fresh()
    g.emit("POW", 1, t)
    g.jeq(0, t, yes)
    g.goto(no)


def liminf_seq() -> MacroProgram:
    """Literal ``⋃_{β<α} ⋂_{γ∈[β+1,α)} s(γ)`` over an ordinal sequence ``s``.

    Terms whose range is empty (β + 1 = α) are skipped; for α = 1 the
    result is s(0).
    """
    g = Gen(1)
    d = g.call(P("dom"), [0])
    res = g.fresh()
    one = g.fresh()
    g.emit("ADD", one, one)
    single = g.label("single")
    g.jeq(d, one, single)
    b, top, end = g.loop(d)
    nb = g.fresh()
    g.emit("COPY", b, nb)
    g.emit("ADD", b, nb)
    g.jmem(nb, d, (ok := g.label("ok")))
    g.goto(top)
    g.place(ok)
    acc, have = g.fresh(), g.fresh()
    g.emit("ZERO", acc)
    g.emit("ZERO", have)
    c, top2, end2 = g.loop(d)
    take, first = g.label("take"), g.label("first")
    g.jmem(b, c, take)
    g.goto(top2)
    g.place(take)
    v = g.call(P("apply_fn"), [0, c])
    g.jez(have, first)
    g.call(listing("intersect2"), [acc, v], out=acc)
    g.goto(top2)
    g.place(first)
    g.emit("COPY", v, acc)
    g.emit("ADD", have, have)
    g.close(top2, end2)
    g.call(listing("union2"), [res, acc], out=res)
    g.close(top, end)
    g.ret(res)
    g.place(single)
    zero = g.fresh()
    g.ret(g.call(P("apply_fn"), [0, zero]))
    return g.finish()


def _tau_less(g: Gen, yes, no):
    g.jeq(0, 1, no)
    pr = g.call(P("pair"), [0, 1])
    c = g.fresh()
    g.emit("TAKE", pr, c)
    g.jeq(c, 0, yes)
    g.goto(no)


def f_tau() -> MacroProgram:
    """#n -> the n-th set in TAKE order: walk V_0, V_1, ... with a counter."""
    g = Gen(1)
    stage, walk, grow, found = (g.label(n) for n in ("stage", "walk", "grow", "found"))
    s, t, c, x = g.fresh(), g.fresh(), g.fresh(), g.fresh()
    g.place(stage)
    g.emit("COPY", s, t)
    g.emit("ZERO", c)
    g.place(walk)
    g.jez(t, grow)
    g.emit("TAKE", t, x)
    g.jeq(c, 0, found)
    g.emit("REMOVE", x, t)
    g.emit("ADD", c, c)
    g.goto(walk)
    g.place(grow)
    g.emit("POW", s, s)
    g.goto(stage)
    g.place(found)
    g.ret(x)
    return g.finish()


def f_tau_inv() -> MacroProgram:
    """a -> its position: find a stage V_k containing a, then count."""
    g = Gen(1)
    stage, have, walk, done = (g.label(n) for n in ("stage", "have", "walk", "done"))
    s, t, c, x = g.fresh(), g.fresh(), g.fresh(), g.fresh()
    g.place(stage)
    g.jmem(0, s, have)
    g.emit("POW", s, s)
    g.goto(stage)
    g.place(have)
    g.emit("COPY", s, t)
    g.place(walk)
    g.emit("TAKE", t, x)
    g.jeq(x, 0, done)
    g.emit("REMOVE", x, t)
    g.emit("ADD", c, c)
    g.goto(walk)
    g.place(done)
    g.ret(c)
    return g.finish()


def choice_fn() -> MacroProgram:
    """x -> {<y, least member of y> : y in x, y nonempty}."""
    g = Gen(1)
    out = g.fresh()
    y, top, end = g.loop(0)
    g.jez(y, top)
    m = g.fresh()
    g.emit("TAKE", y, m)
    p = g.call(P("opair"), [y, m])
    g.emit("ADD", p, out)
    g.close(top, end)
    g.ret(out)
    return g.finish()


AUTHORED: dict[str, tuple[Callable[[], MacroProgram], str]] = {
    "singleton": (singleton, "x -> {x}"),
    "pair": (pair, "(x, y) -> {x, y}"),
    "opair": (opair, "(x, y) -> <x, y> = {{x}, {x, y}}"),
    "bigunion": (bigunion, "x -> the union of the members of x"),
    "bigintersect": (bigintersect, "x -> the intersection of the members of x (∅ for x = ∅)"),
    "proj1": (proj1, "<x, y> -> x, as the TAKE of the intersection of the pair"),
    "proj2": (proj2, "<x, y> -> y: remove the first projection from the union of the pair"),
    "is_opair": (lambda: predicate(1, _is_opair), "x is an ordered pair: rebuild it from its projections"),
    "is_func": (lambda: predicate(1, _is_func), "x is a set of ordered pairs with distinct first coordinates"),
    "dom": (dom, "f -> the set of first coordinates of f"),
    "apply_fn": (apply_fn, "(f, x) -> f(x)"),
    "is_transitive": (lambda: predicate(1, _is_transitive), "x is transitive (helper)"),
    "is_ordinal": (lambda: predicate(1, _is_ordinal), "x is a transitive set of transitive sets"),
    "is_ordseq": (lambda: predicate(1, _is_ordseq), "x is a function whose domain is an ordinal"),
    "least_sat": (least_sat, "y -> least member of y that is an ordered pair (∅ if none)"),
    "seq_proj": (seq_proj, "(s, α) -> s(α)"),
    "pow": (pow_, "x -> the power set of x"),
    "is_pow": (lambda: predicate(2, _is_pow), "(x, y) -> is x the power set of y"),
    "liminf_seq": (liminf_seq, "s -> limes inferior of the ordinal sequence s"),
    "tau_less": (lambda: predicate(2, _tau_less), "(a, b) -> a precedes b in the TAKE order"),
    "f_tau": (f_tau, "#n -> the n-th set in TAKE order"),
    "f_tau_inv": (f_tau_inv, "a -> the position of a in TAKE order"),
    "choice_fn": (choice_fn, "x -> choice function on the nonempty members of x"),
}


@functools.lru_cache(maxsize=None)
def P(name: str) -> MacroProgram:
    """The in-memory build of an authored program (or a transcribed listing)."""
    if name in TRANSCRIBED:
        return listing(name)
    return AUTHORED[name][0]()


def render(name: str) -> str:
    fn, summary = AUTHORED[name]
    header = (
        f"# {name}: {summary}\n"
        "# authored program (no published listing); generated by srm.stdlib.build\n"
    )
    return header + disassemble(P(name))


def main(argv=None) -> None:
    out = Path(__file__).with_name("programs")
    for name in AUTHORED:
        (out / f"{name}.srm").write_text(render(name))
        print(f"wrote {name}.srm")


if __name__ == "__main__":
    main()
