"""Fallible Beth models over regular trees, propositional forcing, and a
small countermodel search.

A model is a finite automaton: each state has a nonempty list of successor
states, and the Beth tree is the unfolding of that automaton from the root.
Forcing at a tree node depends only on its state, so it can be computed on
the states.  Disjunction needs a bar (every path eventually decides one of
the disjuncts), which on the unfolding is the least fixpoint

    X = F ∪ {s : every successor of s is in X}

where F is the set of states forcing one of the disjuncts.  This is the AF
operator of CTL.  Implication quantifies over every state reachable from s,
s itself included.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .lang import BOT, And, Atom, Bot, Formula, Imp, Or, atoms, is_prop, print_prop, subformulas


class BethError(Exception):
    pass


class ModelFormatError(BethError):
    pass


class NotForced(BethError):
    pass


@dataclass(frozen=True)
class RegularBethModel:
    states: tuple
    successors: Mapping[str, tuple]
    atoms: Mapping[str, frozenset]
    fallible: Mapping[str, bool]
    root: str

    def __post_init__(self):
        names = set(self.states)
        if len(names) != len(self.states):
            raise ModelFormatError("duplicate state names")
        if self.root not in names:
            raise ModelFormatError(f"root {self.root!r} is not a state")
        for s in self.states:
            succ = self.successors.get(s)
            if not succ:
                raise ModelFormatError(f"state {s!r} needs at least one successor")
            unknown = [t for t in succ if t not in names]
            if unknown:
                raise ModelFormatError(f"state {s!r} has unknown successor {unknown[0]!r}")

    def atoms_in_play(self) -> frozenset:
        return frozenset().union(*(self.atoms.get(s, frozenset()) for s in self.states))

    def reachable(self, s: str) -> set:
        seen, todo = {s}, [s]
        while todo:
            for t in self.successors[todo.pop()]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen


def make_model(
    successors: Mapping[str, Sequence[str]],
    atoms: Mapping[str, Iterable[int]] = {},
    fallible: Iterable[str] = (),
    root: Optional[str] = None,
) -> RegularBethModel:
    states = tuple(successors)
    bad = set(fallible)
    return RegularBethModel(
        states,
        {s: tuple(successors[s]) for s in states},
        {s: frozenset(atoms.get(s, ())) for s in states},
        {s: s in bad for s in states},
        states[0] if root is None else root,
    )


def em_model() -> RegularBethModel:
    """Two states refuting p0 ∨ ¬p0: s0 may stay in s0 forever or move to s1 where p0 holds."""
    return make_model({"s0": ["s1", "s0"], "s1": ["s1"]}, {"s1": [0]})


# --- fixpoints -----------------------------------------------------------------------


def af(m: RegularBethModel, target: set) -> set:
    """States from which every infinite path meets ``target``."""
    x = set(target)
    changed = True
    while changed:
        changed = False
        for s in m.states:
            if s not in x and all(t in x for t in m.successors[s]):
                x.add(s)
                changed = True
    return x


def _af_levels(m: RegularBethModel, target: set) -> dict:
    """Stage at which each state enters the AF fixpoint (0 for the target)."""
    level = {s: 0 for s in target}
    stage = 0
    while True:
        stage += 1
        new = [s for s in m.states if s not in level and all(t in level for t in m.successors[s])]
        if not new:
            return level
        for s in new:
            level[s] = stage


def _upward(m: RegularBethModel, base: set) -> set:
    out = set()
    for s in base:
        out |= m.reachable(s)
    return out


# --- validation ----------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    state: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} at {self.state}" + (f": {self.detail}" if self.detail else "")


def validate_model(m: RegularBethModel) -> list:
    """Every violated frame or model condition, with a witnessing state.  Empty means valid."""
    out = []
    bad = {s for s in m.states if m.fallible[s]}
    for s in sorted(bad):
        for t in m.successors[s]:
            if not m.fallible[t]:
                out.append(Diagnostic("fallible-not-absorbing", s, f"successor {t} is not fallible"))
    for s in sorted(af(m, bad) - bad):
        out.append(Diagnostic("fallibility-closure", s, "every path meets a fallible state"))
    in_play = m.atoms_in_play()
    for s in m.states:
        for t in m.successors[s]:
            lost = m.atoms[s] - m.atoms[t]
            if lost:
                out.append(Diagnostic("atom-monotonicity", s, f"p{min(lost)} lost at successor {t}"))
    for s in sorted(bad):
        missing = in_play - m.atoms[s]
        if missing:
            out.append(Diagnostic("fallible-atoms", s, f"p{min(missing)} missing at a fallible state"))
    for p in sorted(in_play):
        holds = {s for s in m.states if p in m.atoms[s]}
        for s in sorted(af(m, holds) - holds):
            out.append(Diagnostic("bar-closure", s, f"p{p} holds on a bar but not here"))
    return out


def is_valid_model(m: RegularBethModel) -> bool:
    return not validate_model(m)


# --- forcing -------------------------------------------------------------------------


@dataclass
class ForcingTable:
    model: RegularBethModel
    table: dict = field(default_factory=dict)  # formula -> set of forcing states

    def forces(self, s: str, f: Formula) -> bool:
        return s in self.table[f]

    def __getitem__(self, key) -> bool:
        s, f = key
        return self.forces(s, f)

    def formulas(self) -> list:
        return list(self.table)


def _check_prop(f: Formula) -> None:
    if not is_prop(f):
        raise BethError(f"not a propositional formula: {f}")


def force(m: RegularBethModel, f: Formula, table: Optional[ForcingTable] = None) -> ForcingTable:
    """Forcing of every subformula of ``f`` at every state."""
    _check_prop(f)
    t = table or ForcingTable(m)
    bad = {s for s in m.states if m.fallible[s]}
    for g in subformulas(f):
        if g in t.table:
            continue
        if isinstance(g, Bot):
            val = set(bad)
        elif isinstance(g, Atom):
            val = bad | {s for s in m.states if g.index in m.atoms[s]}
        elif isinstance(g, And):
            val = t.table[g.left] & t.table[g.right]
        elif isinstance(g, Or):
            val = af(m, t.table[g.left] | t.table[g.right])
        else:
            a, b = t.table[g.left], t.table[g.right]
            val = {s for s in m.states if all(w in b for w in m.reachable(s) if w in a)}
        t.table[g] = val
    return t


def forces(m: RegularBethModel, s: str, f: Formula) -> bool:
    return s in force(m, f).table[f]


def check_valid_on(m: RegularBethModel, f: Formula) -> bool:
    """Whether the root forces ``f``."""
    return forces(m, m.root, f)


def is_monotone(t: ForcingTable) -> bool:
    m = t.model
    return all(
        all(u in val for u in m.successors[s]) for val in t.table.values() for s in val
    )


# --- bar witnesses -------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """Why a state forces a formula.

    For a disjunction, ``pairs`` is the bar: frontier states with the disjunct
    ("left" or "right") forced there, reached from ``state`` along every
    path.  For an implication, ``pairs`` lists the reachable states forcing
    the antecedent, each paired with "consequent"; an empty list means the
    implication holds vacuously.  Atoms and ⊥ use "atom" and "fallible".
    """

    state: str
    goal: Formula
    pairs: tuple

    def __str__(self) -> str:
        inner = ", ".join(f"({s}, {tag})" for s, tag in self.pairs)
        return f"{self.state} forces {print_prop(self.goal)} via {{{inner}}}"


def bar_witness(m: RegularBethModel, state: str, goal: Formula) -> Witness:
    t = force(m, goal)
    if state not in t.table[goal]:
        raise NotForced(f"{state} does not force {print_prop(goal)}")
    if isinstance(goal, Or):
        left, right = t.table[goal.left], t.table[goal.right]
        level = _af_levels(m, left | right)
        frontier, seen, todo = set(), {state}, [state]
        while todo:
            s = todo.pop()
            if s in left:
                frontier.add((s, "left"))
            elif s in right:
                frontier.add((s, "right"))
            else:
                # successors entered the fixpoint earlier, so this terminates
                for u in m.successors[s]:
                    assert level[u] < level[s]
                    if u not in seen:
                        seen.add(u)
                        todo.append(u)
        return Witness(state, goal, tuple(sorted(frontier)))
    if isinstance(goal, Imp):
        ante = t.table[goal.left]
        hits = sorted(w for w in m.reachable(state) if w in ante)
        return Witness(state, goal, tuple((w, "consequent") for w in hits))
    if m.fallible[state]:
        return Witness(state, goal, ((state, "fallible"),))
    if isinstance(goal, Atom):
        return Witness(state, goal, ((state, "atom"),))
    return Witness(state, goal, ((state, "left"), (state, "right")))


def unrolled_bar(m: RegularBethModel, state: str, target: set, depth: int) -> bool:
    """Explicit check on the tree unrolled to ``depth``: does every path meet ``target``?"""
    if state in target:
        return True
    if depth == 0:
        return False
    return all(unrolled_bar(m, u, target, depth - 1) for u in m.successors[state])


# --- IPC axioms ------------------------------------------------------------------------


def ipc_axioms(a: Formula, b: Formula, c: Formula) -> list:
    """A Hilbert axiomatization of intuitionistic propositional logic, instantiated."""
    return [
        Imp(a, Imp(b, a)),
        Imp(Imp(a, Imp(b, c)), Imp(Imp(a, b), Imp(a, c))),
        Imp(And(a, b), a),
        Imp(And(a, b), b),
        Imp(a, Imp(b, And(a, b))),
        Imp(a, Or(a, b)),
        Imp(b, Or(a, b)),
        Imp(Imp(a, c), Imp(Imp(b, c), Imp(Or(a, b), c))),
        Imp(BOT, a),
    ]


IPC_AXIOMS = tuple(ipc_axioms(Atom(0), Atom(1), Atom(2)))


def random_prop(rng: random.Random, depth: int, n_atoms: int) -> Formula:
    if depth <= 0 or rng.random() < 0.3:
        return BOT if rng.random() < 0.1 else Atom(rng.randrange(n_atoms))
    node = rng.choice((And, Or, Imp))
    return node(random_prop(rng, depth - 1, n_atoms), random_prop(rng, depth - 1, n_atoms))


# --- random models ---------------------------------------------------------------------


def repair(m: RegularBethModel) -> RegularBethModel:
    """Smallest enlargement of the fallible set and the atom sets that makes ``m`` valid."""
    bad = af(m, _upward(m, {s for s in m.states if m.fallible[s]}))
    in_play = m.atoms_in_play()
    holds = {}
    for p in in_play:
        base = {s for s in m.states if p in m.atoms[s]} | bad
        holds[p] = af(m, _upward(m, base))
    return RegularBethModel(
        m.states,
        dict(m.successors),
        {s: frozenset(p for p in in_play if s in holds[p]) for s in m.states},
        {s: s in bad for s in m.states},
        m.root,
    )


def random_model(
    rng: random.Random, max_states: int = 6, n_atoms: int = 3, max_branching: int = 3, p_fallible: float = 0.1
) -> RegularBethModel:
    """A random model repaired to validity."""
    n = rng.randint(1, max_states)
    names = [f"s{i}" for i in range(n)]
    succ = {s: [rng.choice(names) for _ in range(rng.randint(1, max_branching))] for s in names}
    atom_sets = {s: {p for p in range(n_atoms) if rng.random() < 0.3} for s in names}
    bad = [s for s in names if rng.random() < p_fallible]
    return repair(make_model(succ, atom_sets, bad))


# --- countermodel search ---------------------------------------------------------------


def _closed_sets(m: RegularBethModel, must: set) -> list:
    """Upward closed, bar-closed state sets containing ``must``, in lexicographic order."""
    out = []
    n = len(m.states)
    for bits in range(1 << n):
        x = {m.states[i] for i in range(n) if bits >> i & 1}
        if must <= x and _upward(m, x) == x and af(m, x) == x:
            out.append(x)
    return out


def _graphs(n: int, branching: int) -> Iterator[tuple]:
    """Successor-set structures with maximum out-degree exactly ``branching``,
    all states reachable from state 0, one per isomorphism class."""
    options = [
        c for k in range(1, branching + 1) for c in itertools.combinations(range(n), k)
    ]
    seen = set()
    for succ in itertools.product(options, repeat=n):
        if max(len(c) for c in succ) != branching:
            continue
        reach, todo = {0}, [0]
        while todo:
            for t in succ[todo.pop()]:
                if t not in reach:
                    reach.add(t)
                    todo.append(t)
        if len(reach) != n:
            continue
        key = _canonical(succ)
        if key in seen:
            continue
        seen.add(key)
        yield succ


def _canonical(succ: tuple) -> tuple:
    n = len(succ)
    best = None
    for perm in itertools.permutations(range(1, n)):
        relabel = (0, *perm)
        form = [None] * n
        for i, c in enumerate(succ):
            form[relabel[i]] = tuple(sorted(relabel[j] for j in c))
        form = tuple(form)
        if best is None or form < best:
            best = form
    return best


def iter_models(atoms_used: Sequence[int], max_states: int, max_branching: int) -> Iterator[RegularBethModel]:
    """Valid models in search order: state count, then branching, then
    fallible and atom assignments in lexicographic order."""
    for n in range(1, max_states + 1):
        names = [f"s{i}" for i in range(n)]
        for b in range(1, min(max_branching, n) + 1):
            for succ in _graphs(n, b):
                frame = make_model({names[i]: [names[j] for j in succ[i]] for i in range(n)})
                for bad in _closed_sets(frame, set()):
                    if frame.root in bad:
                        continue
                    choices = [_closed_sets(frame, bad) for _ in atoms_used]
                    for combo in itertools.product(*choices):
                        labels = {s: {p for p, x in zip(atoms_used, combo) if s in x} for s in names}
                        yield make_model(frame.successors, labels, bad)


def countermodel_search(f: Formula, max_states: int = 3, max_branching: int = 2) -> Optional[RegularBethModel]:
    """First valid model (in search order) whose root does not force ``f``, or None."""
    _check_prop(f)
    used = sorted(atoms(f))
    for m in iter_models(used, max_states, max_branching):
        if not check_valid_on(m, f):
            return m
    return None


# --- text format -------------------------------------------------------------------------

_STATE = re.compile(r"state\s+(\S+)((?:\s+\w+=\S*)*)\s*$")


def _atom_index(tok: str) -> int:
    m = re.fullmatch(r"p?(\d+)", tok)
    if not m:
        raise ModelFormatError(f"bad atom {tok!r}")
    return int(m.group(1))


def parse_model(text: str) -> RegularBethModel:
    succ, labels, bad, root = {}, {}, [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("root"):
            parts = line.split()
            if len(parts) != 2:
                raise ModelFormatError(f"line {lineno}: expected 'root <name>'")
            root = parts[1]
            continue
        m = _STATE.match(line)
        if not m:
            raise ModelFormatError(f"line {lineno}: cannot parse {line!r}")
        name = m.group(1)
        if name in succ:
            raise ModelFormatError(f"line {lineno}: state {name} defined twice")
        fields = dict(kv.split("=", 1) for kv in m.group(2).split())
        unknown = set(fields) - {"atoms", "fallible", "succ"}
        if unknown:
            raise ModelFormatError(f"line {lineno}: unknown field {sorted(unknown)[0]}")
        items = lambda key: [x for x in fields.get(key, "").split(",") if x]
        labels[name] = [_atom_index(a) for a in items("atoms")]
        if fields.get("fallible", "0") not in ("0", "1"):
            raise ModelFormatError(f"line {lineno}: fallible must be 0 or 1")
        if fields.get("fallible") == "1":
            bad.append(name)
        succ[name] = items("succ")
    if not succ:
        raise ModelFormatError("no states")
    return make_model(succ, labels, bad, root)


def format_model(m: RegularBethModel) -> str:
    lines = []
    for s in m.states:
        atoms_text = ",".join(f"p{p}" for p in sorted(m.atoms[s]))
        succ_text = ",".join(m.successors[s])
        lines.append(f"state {s} atoms={atoms_text} fallible={int(m.fallible[s])} succ={succ_text}")
    lines.append(f"root {m.root}")
    return "\n".join(lines) + "\n"
