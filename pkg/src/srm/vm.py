"""Deterministic execution of set register programs.

A run iterates the successor relation.  When a configuration repeats exactly,
the machine is periodic from then on, so the next limit stage is computed
directly: the line becomes the least line in the cycle and every register
the liminf of its cycle values (the intersection of the values, since a
member of the liminf must be present from some point on).  Execution then
resumes from that limit configuration.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from . import hfset as hf
from .asm import MacroProgram, Program, expand_macros
from .hfset import EMPTY, HfSet

OracleTable = Mapping[HfSet, HfSet]


@dataclass(frozen=True)
class RunLimits:
    max_steps: int = 200_000
    max_limit_jumps: int = 16
    # largest cardinality POW may be applied to (2**16 subsets)
    max_powerset_input: int = 16

    def __post_init__(self):
        if min(self.max_steps, self.max_limit_jumps, self.max_powerset_input) <= 0:
            raise ValueError("run limits must be positive")

    @classmethod
    def from_env(cls, var: str = "SRM_DEFAULT_LIMITS") -> "RunLimits":
        """Read ``max_steps=N,max_limits=K,max_pow=P`` from the environment."""
        text = os.environ.get(var, "").strip()
        if not text:
            return cls()
        names = {"max_steps": "max_steps", "max_limits": "max_limit_jumps", "max_pow": "max_powerset_input"}
        kwargs = {}
        for item in text.split(","):
            key, _, value = item.partition("=")
            key = key.strip()
            if key not in names:
                raise ValueError(f"{var}: unknown key {key!r}")
            kwargs[names[key]] = int(value)
        return cls(**kwargs)


DEFAULT_LIMITS = RunLimits()


@dataclass(frozen=True)
class Configuration:
    line: int
    registers: tuple

    def __str__(self) -> str:
        return f"{self.line}: " + " ".join(hf.format_hf(r) for r in self.registers)


@dataclass(frozen=True)
class OmegaMarker:
    """Limit stage: the preceding segment repeats from ``prefix`` with ``period``."""

    prefix: int
    period: int

    def __str__(self) -> str:
        return f"@omega prefix={self.prefix} period={self.period}"


@dataclass
class Trace:
    entries: list = field(default_factory=list)

    def configurations(self) -> Iterator[Configuration]:
        return (e for e in self.entries if isinstance(e, Configuration))

    def __len__(self) -> int:
        return len(self.entries)


# --- outcomes --------------------------------------------------------------------


class Outcome:
    halted = False


@dataclass(frozen=True)
class Halted(Outcome):
    value: HfSet
    steps: int
    limit_jumps: int
    halted = True

    def __str__(self) -> str:
        return f"Halted({hf.format_hf(self.value)}, steps={self.steps}, limit_jumps={self.limit_jumps})"


@dataclass(frozen=True)
class StepBudgetExhausted(Outcome):
    """The limit-jump budget ran out: the run keeps cycling through limit stages."""

    steps: int
    limit_jumps: int


@dataclass(frozen=True)
class OracleDiverged(Outcome):
    at_line: int
    query: HfSet

    def __str__(self) -> str:
        return f"OracleDiverged(at_line={self.at_line}, query={hf.format_hf(self.query)})"


@dataclass(frozen=True)
class ResourceExceeded(Outcome):
    at_line: int
    detail: str


@dataclass(frozen=True)
class NoCycleAtBudget(Outcome):
    """``max_steps`` successor steps passed without a repeated configuration."""

    steps: int
    limit_jumps: int


class RunError(Exception):
    def __init__(self, outcome: Outcome):
        super().__init__(str(outcome))
        self.outcome = outcome


# --- the successor relation --------------------------------------------------------------


class StepResult(enum.Enum):
    HALT = "halt"
    ORACLE_UNDEFINED = "oracle-undefined"


HALT = StepResult.HALT
ORACLE_UNDEFINED = StepResult.ORACLE_UNDEFINED


def _execute(ins, regs: list, line: int, oracle: Optional[OracleTable], limits: RunLimits) -> Optional[int]:
    """Apply one instruction to ``regs`` in place; return the next line.

    Returns None when an oracle query is undefined (``regs`` untouched).
    Raises :class:`hf.ResourceExceeded` for POW over budget.
    """
    op, a = ins.op, ins.args
    if op == "ZERO":
        regs[a[0]] = EMPTY
    elif op == "ADD":
        regs[a[1]] = hf.add_element(regs[a[0]], regs[a[1]])
    elif op == "COPY":
        regs[a[1]] = regs[a[0]]
    elif op == "TAKE":
        src = regs[a[0]]
        if src.elements:
            regs[a[1]] = src.elements[0]
    elif op == "REMOVE":
        regs[a[1]] = hf.diff_singleton(regs[a[0]], regs[a[1]])
    elif op == "JEZ":
        if not regs[a[0]].elements:
            return a[1]
    elif op == "JMEM":
        if hf.is_member(regs[a[0]], regs[a[1]]):
            return a[2]
    elif op == "POW":
        src = regs[a[0]]
        if len(src) > limits.max_powerset_input:
            raise hf.ResourceExceeded(f"POW on a {len(src)}-element set (limit {limits.max_powerset_input})")
        regs[a[1]] = hf.powerset(src, 1 << limits.max_powerset_input)
    elif op == "ORACLE":
        answer = oracle.get(regs[a[0]]) if oracle is not None else None
        if answer is None:
            return None
        regs[a[1]] = answer
    else:  # pragma: no cover - Program rejects macros
        raise ValueError(f"cannot execute {op}")
    return line + 1


def step(
    p: Program,
    c: Configuration,
    oracle: Optional[OracleTable] = None,
    limits: RunLimits = DEFAULT_LIMITS,
) -> Union[Configuration, StepResult]:
    if not 1 <= c.line <= len(p.lines):
        return HALT
    regs = list(c.registers)
    nxt = _execute(p.lines[c.line - 1], regs, c.line, oracle, limits)
    if nxt is None:
        return ORACLE_UNDEFINED
    return Configuration(nxt, tuple(regs))


def limit_configuration(cycle: Sequence[Configuration]) -> Configuration:
    """Limit of the run that repeats ``cycle`` forever."""
    width = len(cycle[0].registers)
    return Configuration(
        min(c.line for c in cycle),
        tuple(hf.liminf_cycle([c.registers[r] for c in cycle]) for r in range(width)),
    )


def initial_configuration(p: Program, inputs: Sequence[HfSet]) -> Configuration:
    width = max(p.num_registers, len(inputs))
    return Configuration(1, tuple(inputs) + (EMPTY,) * (width - len(inputs)))


def run(
    p: Union[Program, MacroProgram],
    inputs: Sequence[HfSet] = (),
    oracle: Optional[OracleTable] = None,
    limits: RunLimits = DEFAULT_LIMITS,
    record: bool = True,
) -> tuple[Outcome, Trace]:
    """Execute ``p`` on ``inputs``; returns the outcome and (if ``record``) the trace."""
    p = expand_macros(p, len(inputs))
    lines = p.lines
    n = len(lines)
    start = initial_configuration(p, inputs)
    line, regs = start.line, list(start.registers)
    trace = Trace()
    entries = trace.entries
    segment: list[tuple] = []
    seen: dict[tuple, int] = {}
    steps = jumps = 0
    while True:
        key = (line, tuple(regs))
        if not 1 <= line <= n:
            if record:
                entries.append(Configuration(*key))
            return Halted(regs[0], steps, jumps), trace
        first = seen.get(key)
        if first is not None:
            jumps += 1
            if jumps > limits.max_limit_jumps:
                return StepBudgetExhausted(steps, jumps - 1), trace
            cycle = [Configuration(*k) for k in segment[first:]]
            if record:
                entries.append(OmegaMarker(first, len(segment) - first))
            limit = limit_configuration(cycle)
            line, regs = limit.line, list(limit.registers)
            segment, seen = [], {}
            continue
        if steps >= limits.max_steps:
            return NoCycleAtBudget(steps, jumps), trace
        seen[key] = len(segment)
        segment.append(key)
        if record:
            entries.append(Configuration(*key))
        try:
            nxt = _execute(lines[line - 1], regs, line, oracle, limits)
        except hf.ResourceExceeded as exc:
            return ResourceExceeded(line, str(exc)), trace
        if nxt is None:
            return OracleDiverged(line, regs[lines[line - 1].args[0]]), trace
        line = nxt
        steps += 1


def run_as_function(
    p: Union[Program, MacroProgram],
    args: Sequence[HfSet] = (),
    oracle: Optional[OracleTable] = None,
    limits: RunLimits = DEFAULT_LIMITS,
) -> HfSet:
    """Final R0 of a halting run; any other outcome raises :class:`RunError`."""
    outcome, _ = run(p, args, oracle, limits, record=False)
    if not isinstance(outcome, Halted):
        raise RunError(outcome)
    return outcome.value


# --- trace checking -------------------------------------------------------------------------


def check_trace(
    p: Union[Program, MacroProgram],
    trace: Trace,
    oracle: Optional[OracleTable] = None,
    inputs: Optional[Sequence[HfSet]] = None,
    limits: RunLimits = DEFAULT_LIMITS,
) -> bool:
    """True iff ``trace`` is a successful (halting) computation of ``p``.

    With ``inputs`` the initial configuration must match them exactly;
    otherwise only its line and register count are checked.  Macro
    expansion depends on the number of inputs, so for a macro program
    without ``inputs`` every input count the trace allows is tried.
    """
    entries = trace.entries
    if not entries or not isinstance(entries[0], Configuration):
        return False
    first = entries[0]
    if first.line != 1:
        return False
    if inputs is not None:
        expanded = expand_macros(p, len(inputs))
        return first == initial_configuration(expanded, inputs) and _check_steps(expanded, entries, oracle, limits)
    if isinstance(p, Program):
        candidates = [p]
    else:
        candidates = list({expand_macros(p, r): None for r in range(len(first.registers) + 1)})
    return any(
        len(first.registers) >= q.num_registers and _check_steps(q, entries, oracle, limits) for q in candidates
    )


def _check_steps(p: Program, entries: list, oracle, limits) -> bool:
    def succ(c):
        try:
            return step(p, c, oracle, limits)
        except hf.ResourceExceeded:
            return None

    segment = [entries[0]]
    i = 1
    while i < len(entries):
        e = entries[i]
        if isinstance(e, OmegaMarker):
            if e.period < 1 or e.prefix < 0 or e.prefix + e.period != len(segment):
                return False
            if succ(segment[-1]) != segment[e.prefix]:
                return False
            limit = entries[i + 1] if i + 1 < len(entries) else None
            if not isinstance(limit, Configuration) or limit != limit_configuration(segment[e.prefix :]):
                return False
            segment = [limit]
            i += 2
            continue
        if not isinstance(e, Configuration) or succ(segment[-1]) != e:
            return False
        segment.append(e)
        i += 1
    return succ(segment[-1]) is HALT


# --- text formats ----------------------------------------------------------------------------


def format_trace(trace: Trace) -> str:
    return "".join(f"{e}\n" for e in trace.entries)


def parse_trace(text: str) -> Trace:
    entries: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("@omega"):
            fields = dict(part.split("=", 1) for part in line.split()[1:])
            try:
                entries.append(OmegaMarker(int(fields["prefix"]), int(fields["period"])))
            except (KeyError, ValueError):
                raise ValueError(f"line {lineno}: bad limit marker {line!r}") from None
            continue
        head, sep, rest = line.partition(":")
        if not sep or not head.strip().isdigit():
            raise ValueError(f"line {lineno}: expected '<line>: <registers>'")
        regs = []
        pos = hf._skip_ws(rest, 0)
        while pos < len(rest):
            value, pos = hf.parse_hf_at(rest, pos)
            regs.append(value)
            pos = hf._skip_ws(rest, pos)
        entries.append(Configuration(int(head), tuple(regs)))
    return Trace(entries)


def parse_oracle_table(text: str) -> dict[HfSet, HfSet]:
    """Lines ``<hf> => <hf>``; ``#`` starts a comment only at line start."""
    table: dict[HfSet, HfSet] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or (line.startswith("#") and not line[1:2].isdigit()):
            continue
        left, sep, right = line.partition("=>")
        if not sep:
            raise ValueError(f"line {lineno}: expected '<hf> => <hf>'")
        key = hf.parse_hf(left.strip())
        if key in table:
            raise ValueError(f"line {lineno}: duplicate oracle entry for {hf.format_hf(key)}")
        table[key] = hf.parse_hf(right.strip())
    return table


def format_oracle_table(table: OracleTable) -> str:
    return "".join(f"{hf.format_hf(k)} => {hf.format_hf(v)}\n" for k, v in sorted(table.items()))
