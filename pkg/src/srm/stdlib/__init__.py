"""Named library of SRM programs, each paired with a native oracle.

``get(name)`` returns a :class:`StdlibEntry`; ``run_entry`` executes one on
the VM and ``differential_test`` compares it with its oracle on seeded random
inputs.  Programs destroy their inputs freely (``eq`` does, as published);
every run starts from a fresh initial configuration, so callers never see
that.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional, Sequence

from .. import hfset as hf
from ..asm import Flavor, MacroProgram, assemble
from ..hfset import EMPTY, HfSet
from ..vm import DEFAULT_LIMITS, Halted, RunError, RunLimits, run
from .build import AUTHORED, TRANSCRIBED, make_least_sat

__all__ = [
    "StdlibEntry",
    "UnknownName",
    "get",
    "list_entries",
    "run_entry",
    "differential_test",
    "DiffReport",
    "make_least_sat",
    "LEMMA_ENTRIES",
]


class UnknownName(KeyError):
    pass


Generator = Callable[[random.Random, int], tuple]


@dataclass(frozen=True)
class StdlibEntry:
    name: str
    program: MacroProgram
    arity: int
    oracle: Callable[..., HfSet]
    flavor: Flavor
    generate: Generator
    transcribed: bool
    summary: str


def _bool(b: bool) -> HfSet:
    return hf.numeral(1 if b else 0)


# --- input generators ---------------------------------------------------------------


def _rand(rng: random.Random, max_rank: int) -> HfSet:
    return hf.random_hf(rng, max_rank)


def _args(n: int) -> Generator:
    return lambda rng, r: tuple(_rand(rng, r) for _ in range(n))


def _maybe_equal(rng, r):
    a = _rand(rng, r)
    return (a, a) if rng.random() < 0.3 else (a, _rand(rng, r))


def _opair_arg(rng, r):
    return (hf.ordered_pair(_rand(rng, max(r - 2, 0)), _rand(rng, max(r - 2, 0))),)


def _maybe_opair(rng, r):
    return _opair_arg(rng, r) if rng.random() < 0.5 else (_rand(rng, r),)


def _function(rng, r, size=None) -> HfSet:
    sub = max(r - 2, 0)
    size = rng.randrange(5) if size is None else size
    keys = {_rand(rng, sub) for _ in range(size)}
    return hf.make_function((k, _rand(rng, sub)) for k in keys)


def _maybe_function(rng, r):
    if rng.random() < 0.5:
        return (_function(rng, r),)
    f = _function(rng, r)
    # inject a clash or a non-pair to exercise the negative answer
    extra = hf.ordered_pair(f.elements[0].elements[0].elements[0], _rand(rng, 1)) if f and rng.random() < 0.5 else _rand(rng, r)
    return (hf.add_element(extra, f),)


def _nonempty(rng, r):
    while True:
        a = _rand(rng, max(r, 1))
        if a:
            return (a,)


def _apply_args(rng, r):
    f = _function(rng, r, size=rng.randrange(1, 5))
    x = rng.choice(f.elements).elements[0].elements[0]
    return (f, x)


def _sequence(rng, r, min_len=0):
    return hf.make_sequence([_rand(rng, max(r - 2, 0)) for _ in range(rng.randrange(min_len, 5))])


def _maybe_ordinal(rng, r):
    return (hf.numeral(rng.randrange(5)),) if rng.random() < 0.5 else (_rand(rng, r),)


def _maybe_ordseq(rng, r):
    return (_sequence(rng, r),) if rng.random() < 0.5 else _maybe_function(rng, r)


def _seq_proj_args(rng, r):
    s = _sequence(rng, r, min_len=1)
    return (s, hf.numeral(rng.randrange(len(s))))


def _pow_arg(rng, r):
    return (_rand(rng, min(r, 3)),)


def _is_pow_args(rng, r):
    y = _rand(rng, min(r, 2))
    return (hf.powerset(y), y) if rng.random() < 0.5 else (_rand(rng, min(r, 3)), y)


def _least_sat_arg(rng, r):
    members = [_opair_arg(rng, r)[0] if rng.random() < 0.3 else _rand(rng, r - 1) for _ in range(rng.randrange(5))]
    return (hf.make_set(members),)


def _small_numeral(limit):
    return lambda rng, r: (hf.numeral(rng.randrange(limit)),)


def _small_set(rng, r):
    return (_rand(rng, min(r, 3)),)


def _sequence_arg(rng, r):
    return (_sequence(rng, r, min_len=1),)


# --- oracles -------------------------------------------------------------------------


def _least_sat_oracle(y: HfSet) -> HfSet:
    return next((x for x in y if hf.is_ordered_pair(x)), EMPTY)


def _choice_oracle(x: HfSet) -> HfSet:
    return hf.make_function((y, hf.take_least(y)) for y in x if y)


_TABLE: dict[str, tuple[int, Callable, Generator]] = {
    "eq": (2, lambda a, b: _bool(a is b), _maybe_equal),
    "union2": (2, hf.union2, _args(2)),
    "intersect2": (2, hf.intersect2, _args(2)),
    "singleton": (1, hf.singleton, _args(1)),
    "pair": (2, hf.pair, _args(2)),
    "opair": (2, hf.ordered_pair, _args(2)),
    "proj1": (1, hf.proj1, _opair_arg),
    "proj2": (1, hf.proj2, _opair_arg),
    "is_opair": (1, lambda p: _bool(hf.is_ordered_pair(p)), _maybe_opair),
    "is_func": (1, lambda f: _bool(hf.is_function(f)), _maybe_function),
    "bigunion": (1, hf.big_union, _args(1)),
    "bigintersect": (1, hf.big_intersect, _nonempty),
    "dom": (1, hf.domain, lambda rng, r: (_function(rng, r),)),
    "apply_fn": (2, hf.apply, _apply_args),
    "is_transitive": (1, lambda a: _bool(hf.is_transitive(a)), _maybe_ordinal),
    "is_ordinal": (1, lambda a: _bool(hf.is_ordinal(a)), _maybe_ordinal),
    "is_ordseq": (1, lambda s: _bool(hf.is_ord_sequence(s)), _maybe_ordseq),
    "least_sat": (1, _least_sat_oracle, _least_sat_arg),
    "seq_proj": (2, hf.apply, _seq_proj_args),
    "pow": (1, hf.powerset, _pow_arg),
    "is_pow": (2, lambda x, y: _bool(hf.powerset(y) is x), _is_pow_args),
    "liminf_seq": (1, lambda s: hf.liminf_formula(hf.sequence_values(s)), _sequence_arg),
    "vstage": (1, lambda n: hf.v_stage(hf.to_natural(n)), _small_numeral(5)),
    "tau_less": (2, lambda a, b: _bool(hf.ack_compare(a, b) < 0), _maybe_equal),
    "f_tau": (1, lambda n: hf.f_tau(hf.to_natural(n)), _small_numeral(24)),
    "f_tau_inv": (1, lambda a: hf.numeral(hf.f_tau_inv(a)), _small_set),
    "choice_fn": (1, _choice_oracle, _args(1)),
}

# one entry per item of the list of basic computable operations; items with
# two functions (singleton/pair, the projections) contribute both
LEMMA_ENTRIES = (
    "union2", "intersect2", "singleton", "pair", "opair", "proj1", "proj2",
    "is_opair", "is_func", "bigunion", "bigintersect", "dom", "apply_fn",
    "is_ordinal", "is_ordseq", "least_sat", "seq_proj", "pow", "is_pow", "liminf_seq",
)

_SUMMARY = {
    "eq": "(x, y) -> #1 if x = y else #0",
    "union2": "(x, y) -> x ∪ y",
    "intersect2": "(x, y) -> x ∩ y",
    "vstage": "#n -> V_n",
}

_cache: dict[str, StdlibEntry] = {}


def _load_program(name: str) -> MacroProgram:
    text = (resources.files(__name__) / "programs" / f"{name}.srm").read_text()
    return assemble(text)


def get(name: str) -> StdlibEntry:
    if name not in _TABLE:
        raise UnknownName(name)
    entry = _cache.get(name)
    if entry is None:
        arity, oracle, gen = _TABLE[name]
        program = _load_program(name)
        summary = _SUMMARY.get(name) or AUTHORED[name][1]
        entry = StdlibEntry(
            name, program, arity, oracle, program.effective_flavor, gen, name in TRANSCRIBED, summary
        )
        _cache[name] = entry
    return entry


def list_entries() -> list[str]:
    return sorted(_TABLE)


def run_entry(name: str, args: Sequence[HfSet], limits: RunLimits = DEFAULT_LIMITS) -> HfSet:
    entry = get(name)
    if len(args) != entry.arity:
        raise ValueError(f"{name} takes {entry.arity} argument(s), got {len(args)}")
    outcome, _ = run(entry.program, list(args), limits=limits, record=False)
    if not isinstance(outcome, Halted):
        raise RunError(outcome)
    return outcome.value


@dataclass
class DiffReport:
    name: str
    samples: int
    mismatches: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __str__(self) -> str:
        return f"{self.name}: samples={self.samples} mismatches={len(self.mismatches)} time={self.seconds:.2f}s"


def differential_test(
    name: str,
    samples: int,
    max_rank: int,
    seed: int = 0,
    limits: RunLimits = DEFAULT_LIMITS,
) -> DiffReport:
    """Run ``name`` against its oracle on ``samples`` seeded random inputs.

    A mismatch records ``(args, expected, got)``; ``got`` is the outcome
    object when the program did not halt.
    """
    entry = get(name)
    rng = random.Random(f"{name}:{seed}")
    report = DiffReport(name, samples)
    start = time.perf_counter()
    for _ in range(samples):
        args = entry.generate(rng, max_rank)
        expected = entry.oracle(*args)
        outcome, _ = run(entry.program, list(args), limits=limits, record=False)
        got = outcome.value if isinstance(outcome, Halted) else outcome
        if got is not expected:
            report.mismatches.append((args, expected, got))
    report.seconds = time.perf_counter() - start
    return report
