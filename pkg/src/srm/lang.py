"""Propositional and set-theoretic formulas: ASTs, parsing, printing,
translations, Visser rules and an HF coding of formulas.

Propositional formulas reuse the connective nodes (``Bot``, ``And``, ``Or``,
``Imp``) with ``Atom`` leaves, so a propositional translation is simply the
substitution of atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from . import hfset as hf
from .hfset import HfSet


class LangError(Exception):
    pass


class ParseError(LangError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class MissingAtom(LangError):
    pass


class MalformedCode(LangError):
    pass


# --- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: HfSet

    def __str__(self) -> str:
        return hf.format_hf(self.value)


Term = Union[Var, Const]


# --- formulas ----------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    index: int


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class In(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Pred(Formula):
    index: int
    args: tuple


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class BExists(Formula):
    var: str
    bound: Term
    body: Formula


@dataclass(frozen=True)
class BForall(Formula):
    var: str
    bound: Term
    body: Formula


BOT = Bot()
Binary = (And, Or, Imp)
Quantifier = (Exists, Forall, BExists, BForall)


def neg(f: Formula) -> Formula:
    return Imp(f, BOT)


def iff(a: Formula, b: Formula) -> Formula:
    return And(Imp(a, b), Imp(b, a))


def conj(items: Sequence[Formula]) -> Formula:
    if not items:
        return Imp(BOT, BOT)
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(items: Sequence[Formula]) -> Formula:
    if not items:
        return BOT
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas, children before parents."""
    out: list[Formula] = []
    seen: set[Formula] = set()

    def walk(g: Formula) -> None:
        if g in seen:
            return
        if isinstance(g, Binary):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Quantifier):
            walk(g.body)
        seen.add(g)
        out.append(g)

    walk(f)
    return out


def atoms(f: Formula) -> set[int]:
    return {g.index for g in subformulas(f) if isinstance(g, Atom)}


def is_prop(f: Formula) -> bool:
    return all(isinstance(g, (Atom, Bot, And, Or, Imp)) for g in subformulas(f))


def _term_vars(t: Term) -> set[str]:
    return {t.name} if isinstance(t, Var) else set()


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, (Eq, In)):
        return _term_vars(f.left) | _term_vars(f.right)
    if isinstance(f, Pred):
        return set().union(*(_term_vars(t) for t in f.args))
    if isinstance(f, Binary):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, (BExists, BForall)):
        return _term_vars(f.bound) | (free_vars(f.body) - {f.var})
    return set()


def is_delta0(f: Formula) -> bool:
    """True iff ``f`` is a set formula whose quantifiers are all bounded."""
    return all(
        isinstance(g, (Eq, In, Bot, And, Or, Imp, BExists, BForall)) for g in subformulas(f)
    )


def _fresh(base: str, avoid: set[str]) -> str:
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    return t


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    if not mapping:
        return f
    if isinstance(f, (Atom, Bot)):
        return f
    if isinstance(f, Eq):
        return Eq(_subst_term(f.left, mapping), _subst_term(f.right, mapping))
    if isinstance(f, In):
        return In(_subst_term(f.left, mapping), _subst_term(f.right, mapping))
    if isinstance(f, Pred):
        return Pred(f.index, tuple(_subst_term(t, mapping) for t in f.args))
    if isinstance(f, Binary):
        return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, Quantifier):
        bound = _subst_term(f.bound, mapping) if isinstance(f, (BExists, BForall)) else None
        inner = {k: v for k, v in mapping.items() if k != f.var}
        body_free = free_vars(f.body)
        inner = {k: v for k, v in inner.items() if k in body_free}
        var = f.var
        incoming = set().union(*(_term_vars(t) for t in inner.values())) if inner else set()
        body = f.body
        if var in incoming:
            new = _fresh(var, incoming | body_free | set(inner))
            body = substitute(body, {var: Var(new)})
            var = new
        body = substitute(body, inner)
        if bound is None:
            return type(f)(var, body)
        return type(f)(var, bound, body)
    raise TypeError(f"not a formula: {f!r}")


# --- translations --------------------------------------------------------------


def apply_prop_translation(t: Mapping[int, Formula], a: Formula) -> Formula:
    """Replace every atom ``p_i`` of ``a`` by ``t[i]``; connectives commute."""
    if isinstance(a, Atom):
        if a.index not in t:
            raise MissingAtom(f"translation undefined on p{a.index}")
        return t[a.index]
    if isinstance(a, Bot):
        return a
    if isinstance(a, Binary):
        return type(a)(apply_prop_translation(t, a.left), apply_prop_translation(t, a.right))
    raise LangError(f"not a propositional formula: {a}")


@dataclass(frozen=True)
class PredicateMeaning:
    """Translation of one predicate symbol: a set formula in ``params``."""

    params: tuple
    formula: Formula

    def __post_init__(self):
        extra = free_vars(self.formula) - set(self.params)
        if extra:
            raise LangError(f"free variables {sorted(extra)} not among {self.params}")


def apply_fo_translation(t: Mapping[int, PredicateMeaning], a: Formula) -> Formula:
    if isinstance(a, Pred):
        if a.index not in t:
            raise MissingAtom(f"translation undefined on P{a.index}")
        meaning = t[a.index]
        if len(meaning.params) != len(a.args):
            raise LangError(f"P{a.index} used with {len(a.args)} arguments")
        return substitute(meaning.formula, dict(zip(meaning.params, a.args)))
    if isinstance(a, (Bot, Eq, In)):
        return a
    if isinstance(a, Binary):
        return type(a)(apply_fo_translation(t, a.left), apply_fo_translation(t, a.right))
    if isinstance(a, (Exists, Forall)):
        return type(a)(a.var, apply_fo_translation(t, a.body))
    if isinstance(a, (BExists, BForall)):
        return type(a)(a.var, a.bound, apply_fo_translation(t, a.body))
    raise LangError(f"not a first-order formula: {a}")


def visser_rule(n: int) -> tuple[Formula, Formula]:
    """The restricted Visser rule V_n as (antecedent, consequent).

    ``p_i`` is ``Atom(i)`` for ``1 <= i <= n + 2`` and ``q_i`` is
    ``Atom(n + 2 + i)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    hyp = conj([Imp(Atom(i), Atom(n + 2 + i)) for i in range(1, n + 1)])
    antecedent = Imp(hyp, Or(Atom(n + 1), Atom(n + 2)))
    consequent = disj([Imp(hyp, Atom(j)) for j in range(1, n + 3)])
    return antecedent, consequent


def visser_atom_names(n: int) -> Callable[[int], str]:
    return lambda i: f"p{i}" if i <= n + 2 else f"q{i - n - 2}"


# --- printing ------------------------------------------------------------------

_PREC = {Imp: 1, Or: 2, And: 3}
_SYM = {Imp: "->", Or: "\\/", And: "/\\"}


def print_formula(f: Formula, atom_name: Optional[Callable[[int], str]] = None) -> str:
    name = atom_name or (lambda i: f"p{i}")

    def term(t: Term) -> str:
        return t.name if isinstance(t, Var) else hf.format_hf(t.value)

    def go(g: Formula) -> str:
        if isinstance(g, Atom):
            return name(g.index)
        if isinstance(g, Bot):
            return "bot"
        if isinstance(g, Eq):
            return f"{term(g.left)} = {term(g.right)}"
        if isinstance(g, In):
            return f"{term(g.left)} in {term(g.right)}"
        if isinstance(g, Pred):
            return f"P{g.index}(" + ", ".join(term(t) for t in g.args) + ")"
        if isinstance(g, (Exists, Forall)):
            kw = "exists" if isinstance(g, Exists) else "forall"
            return f"{kw} {g.var} . {go(g.body)}"
        if isinstance(g, (BExists, BForall)):
            kw = "exists" if isinstance(g, BExists) else "forall"
            return f"{kw} {g.var} in {term(g.bound)} . {go(g.body)}"
        prec = _PREC[type(g)]

        def child(c: Formula, right: bool) -> str:
            s = go(c)
            if isinstance(c, Quantifier):
                return f"({s})"
            if isinstance(c, Binary):
                cp = _PREC[type(c)]
                # /\ and \/ associate left, -> associates right
                same_ok = (right and type(g) is Imp) or (not right and type(g) is not Imp)
                if cp < prec or (cp == prec and not same_ok):
                    return f"({s})"
            return s

        return f"{child(g.left, False)} {_SYM[type(g)]} {child(g.right, True)}"

    return go(f)


def print_prop(f: Formula, atom_name: Optional[Callable[[int], str]] = None) -> str:
    return print_formula(f, atom_name)


print_setformula = print_formula


# --- parsing -------------------------------------------------------------------

_KEYWORDS = {"forall", "exists", "in", "bot"}
_UNICODE = {"∧": "/\\", "∨": "\\/", "→": "->", "¬": "~", "⊥": "bot", "∀": "forall", "∃": "exists", "∈": "in"}


class _Parser:
    def __init__(self, text: str, prop: bool):
        self.text = text
        self.pos = 0
        self.prop = prop

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.pos)

    def ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek_sym(self) -> Optional[str]:
        self.ws()
        t = self.text
        p = self.pos
        if p >= len(t):
            return None
        ch = t[p]
        if ch in _UNICODE:
            return _UNICODE[ch]
        for sym in ("->", "/\\", "\\/", "(", ")", ".", "=", "~", ","):
            if t.startswith(sym, p):
                return sym
        if ch.isalpha() or ch == "_":
            end = p
            while end < len(t) and (t[end].isalnum() or t[end] == "_"):
                end += 1
            return t[p:end]
        return ch

    def take(self, sym: Optional[str] = None) -> str:
        got = self.peek_sym()
        if got is None or (sym is not None and got != sym):
            raise self.error(f"expected {sym!r}, found {got!r}" if sym else "unexpected end of input")
        ch = self.text[self.pos]
        self.pos += 1 if ch in _UNICODE else len(got)
        return got

    def parse(self) -> Formula:
        f = self.imp()
        self.ws()
        if self.pos != len(self.text):
            raise self.error("trailing input")
        return f

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek_sym() == "->":
            self.take("->")
            return Imp(left, self.imp())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.peek_sym() == "\\/":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek_sym() == "/\\":
            self.take()
            left = And(left, self.unary())
        return left

    def ident(self) -> str:
        tok = self.peek_sym()
        if tok is None or not (tok[0].isalpha() or tok[0] == "_") or tok in _KEYWORDS:
            raise self.error(f"expected an identifier, found {tok!r}")
        return self.take()

    def unary(self) -> Formula:
        tok = self.peek_sym()
        if tok is None:
            raise self.error("unexpected end of input")
        if tok == "~":
            self.take()
            return neg(self.unary())
        if tok == "(":
            self.take()
            f = self.imp()
            self.take(")")
            return f
        if tok == "bot":
            self.take()
            return BOT
        if tok in ("forall", "exists"):
            if self.prop:
                raise self.error("quantifiers are not propositional")
            self.take()
            var = self.ident()
            bound = None
            if self.peek_sym() == "in":
                self.take()
                bound = self.term()
            self.take(".")
            body = self.imp()
            if bound is None:
                return (Forall if tok == "forall" else Exists)(var, body)
            return (BForall if tok == "forall" else BExists)(var, bound, body)
        if self.prop:
            start = self.pos
            name = self.ident()
            if len(name) > 1 and name[0] == "p" and name[1:].isdigit():
                return Atom(int(name[1:]))
            self.pos = start
            raise self.error(f"expected an atom p<n>, found {name!r}")
        if tok[0] == "P" and tok[1:].isdigit() and len(tok) > 1:
            save = self.pos
            self.take()
            if self.peek_sym() == "(":
                self.take("(")
                args = []
                if self.peek_sym() != ")":
                    args.append(self.term())
                    while self.peek_sym() == ",":
                        self.take()
                        args.append(self.term())
                self.take(")")
                return Pred(int(tok[1:]), tuple(args))
            self.pos = save
        left = self.term()
        op = self.peek_sym()
        if op == "=":
            self.take()
            return Eq(left, self.term())
        if op == "in":
            self.take()
            return In(left, self.term())
        raise self.error(f"expected '=' or 'in', found {op!r}")

    def term(self) -> Term:
        self.ws()
        if self.pos < len(self.text) and self.text[self.pos] in "{∅#<":
            try:
                value, self.pos = hf.parse_hf_at(self.text, self.pos)
            except hf.HfParseError as exc:
                raise ParseError(str(exc), exc.pos) from None
            return Const(value)
        return Var(self.ident())


def parse_setformula(text: str) -> Formula:
    return _Parser(text, prop=False).parse()


def parse_prop(text: str) -> Formula:
    return _Parser(text, prop=True).parse()


parse_formula = parse_setformula


# --- HF coding of formulas --------------------------------------------------------

_TAGS = {Eq: 0, In: 1, Bot: 2, And: 3, Or: 4, Imp: 5, Exists: 6, Forall: 7, BExists: 8, BForall: 9, Pred: 10, Atom: 11}
_BY_TAG = {v: k for k, v in _TAGS.items()}


def _enc_name(name: str) -> HfSet:
    return hf.make_sequence([hf.f_tau(ord(c)) for c in name])


def _dec_name(a: HfSet) -> str:
    try:
        return "".join(chr(hf.f_tau_inv(c)) for c in hf.sequence_values(a))
    except (hf.MalformedValue, ValueError, OverflowError) as exc:
        raise MalformedCode(f"bad name code: {exc}") from None


def _enc_term(t: Term) -> HfSet:
    if isinstance(t, Var):
        return hf.ordered_pair(hf.numeral(0), _enc_name(t.name))
    return hf.ordered_pair(hf.numeral(1), t.value)


def _dec_term(a: HfSet) -> Term:
    tag, payload = _unpair(a)
    if tag is hf.numeral(0):
        return Var(_dec_name(payload))
    if tag is hf.numeral(1):
        return Const(payload)
    raise MalformedCode("bad term tag")


def _unpair(a: HfSet) -> tuple[HfSet, HfSet]:
    if not hf.is_ordered_pair(a):
        raise MalformedCode(f"expected an ordered pair, got {a}")
    return hf.proj1(a), hf.proj2(a)


def _nest(items: Sequence[HfSet]) -> HfSet:
    out = items[-1]
    for x in reversed(items[:-1]):
        out = hf.ordered_pair(x, out)
    return out


def _unnest(a: HfSet, n: int) -> list[HfSet]:
    out = []
    for _ in range(n - 1):
        x, a = _unpair(a)
        out.append(x)
    out.append(a)
    return out


def godel_encode_formula(f: Formula) -> HfSet:
    """Injective HF code ``<#tag, payload>`` with nested pairs for children."""
    tag = hf.numeral(_TAGS[type(f)])
    if isinstance(f, Bot):
        payload = hf.EMPTY
    elif isinstance(f, Atom):
        payload = hf.numeral(f.index)
    elif isinstance(f, (Eq, In)):
        payload = _nest([_enc_term(f.left), _enc_term(f.right)])
    elif isinstance(f, Binary):
        payload = _nest([godel_encode_formula(f.left), godel_encode_formula(f.right)])
    elif isinstance(f, (Exists, Forall)):
        payload = _nest([_enc_name(f.var), godel_encode_formula(f.body)])
    elif isinstance(f, (BExists, BForall)):
        payload = _nest([_enc_name(f.var), _enc_term(f.bound), godel_encode_formula(f.body)])
    elif isinstance(f, Pred):
        payload = hf.ordered_pair(hf.numeral(f.index), hf.make_sequence([_enc_term(t) for t in f.args]))
    else:
        raise TypeError(f"not a formula: {f!r}")
    return hf.ordered_pair(tag, payload)


def godel_decode_formula(a: HfSet) -> Formula:
    tag_set, payload = _unpair(a)
    tag = hf.to_natural(tag_set)
    if tag not in _BY_TAG:
        raise MalformedCode(f"unknown formula tag {tag_set}")
    cls = _BY_TAG[tag]
    if cls is Bot:
        if payload:
            raise MalformedCode("bot carries no payload")
        return BOT
    if cls is Atom:
        n = hf.to_natural(payload)
        if n is None:
            raise MalformedCode("atom index must be a numeral")
        return Atom(n)
    if cls in (Eq, In):
        left, right = _unnest(payload, 2)
        return cls(_dec_term(left), _dec_term(right))
    if cls in (And, Or, Imp):
        left, right = _unnest(payload, 2)
        return cls(godel_decode_formula(left), godel_decode_formula(right))
    if cls in (Exists, Forall):
        name, body = _unnest(payload, 2)
        return cls(_dec_name(name), godel_decode_formula(body))
    if cls in (BExists, BForall):
        name, bound, body = _unnest(payload, 3)
        return cls(_dec_name(name), _dec_term(bound), godel_decode_formula(body))
    index, args = _unpair(payload)
    n = hf.to_natural(index)
    if n is None:
        raise MalformedCode("predicate index must be a numeral")
    try:
        terms = hf.sequence_values(args)
    except hf.MalformedValue as exc:
        raise MalformedCode(str(exc)) from None
    return Pred(n, tuple(_dec_term(t) for t in terms))


def sentence_vars(fs: Iterable[Formula]) -> set[str]:
    return set().union(*(free_vars(f) for f in fs))
