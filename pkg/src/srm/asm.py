"""Instruction set, ``.srm`` assembly text, macro expansion and program codes.

Assembly format: one instruction per line, an optional ``n:`` prefix that must
equal the line's position, mnemonics

    ZERO i | ADD i j | COPY i j | TAKE i j | REMOVE i j | JEZ i k
    JMEM i j k | POW i j | ORACLE i j | GOTO k | JEQ i j k

and ``#`` comments.  A ``.flavor SRM|SRM+|SRM+O`` directive may declare a
flavor larger than the one inferred from the instructions.
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from . import hfset as hf
from .hfset import HfSet

MAX_REGISTER = 1 << 16


class AsmError(Exception):
    pass


class ParseError(AsmError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class BadLineNumber(ParseError):
    pass


class FlavorViolation(AsmError):
    pass


class MalformedCode(AsmError):
    pass


class Flavor(enum.IntEnum):
    SRM = 0
    SRM_PLUS = 1
    SRM_ORACLE = 2

    @property
    def label(self) -> str:
        return _FLAVOR_LABELS[self]


_FLAVOR_LABELS = {Flavor.SRM: "SRM", Flavor.SRM_PLUS: "SRM+", Flavor.SRM_ORACLE: "SRM+O"}
_FLAVOR_BY_LABEL = {v: k for k, v in _FLAVOR_LABELS.items()}

# mnemonic -> (opcode, operand kinds); "r" register, "l" line number
OPCODES = {
    "ZERO": (0, "r"),
    "ADD": (1, "rr"),
    "COPY": (2, "rr"),
    "TAKE": (3, "rr"),
    "REMOVE": (4, "rr"),
    "JEZ": (5, "rl"),
    "JMEM": (6, "rrl"),
    "POW": (7, "rr"),
    "ORACLE": (8, "rr"),
}
MACROS = {"GOTO": "l", "JEQ": "rrl"}
_BY_OPCODE = {code: name for name, (code, _) in OPCODES.items()}


@dataclass(frozen=True)
class Instruction:
    """One command; ``args`` follow the operand kinds of the mnemonic."""

    op: str
    args: tuple

    def __post_init__(self):
        kinds = _kinds(self.op)
        if len(self.args) != len(kinds):
            raise AsmError(f"{self.op} takes {len(kinds)} operands, got {len(self.args)}")
        for kind, a in zip(kinds, self.args):
            if not isinstance(a, int) or a < 0:
                raise AsmError(f"{self.op}: operands must be non-negative integers")
            if kind == "r" and a >= MAX_REGISTER:
                raise AsmError(f"{self.op}: register index {a} out of range")

    @property
    def is_macro(self) -> bool:
        return self.op in MACROS

    @property
    def registers(self) -> tuple:
        return tuple(a for k, a in zip(_kinds(self.op), self.args) if k == "r")

    @property
    def target(self) -> Optional[int]:
        kinds = _kinds(self.op)
        return self.args[-1] if kinds and kinds[-1] == "l" else None

    def retarget(self, target: int) -> "Instruction":
        return Instruction(self.op, self.args[:-1] + (target,))

    def remap(self, regmap) -> "Instruction":
        return Instruction(
            self.op, tuple(regmap(a) if k == "r" else a for k, a in zip(_kinds(self.op), self.args))
        )

    def __str__(self) -> str:
        return " ".join([self.op, *map(str, self.args)])


def _kinds(op: str) -> str:
    if op in OPCODES:
        return OPCODES[op][1]
    if op in MACROS:
        return MACROS[op]
    raise AsmError(f"unknown mnemonic {op!r}")


def ZERO(i):
    return Instruction("ZERO", (i,))


def ADD(i, j):
    return Instruction("ADD", (i, j))


def COPY(i, j):
    return Instruction("COPY", (i, j))


def TAKE(i, j):
    return Instruction("TAKE", (i, j))


def REMOVE(i, j):
    return Instruction("REMOVE", (i, j))


def JEZ(i, k):
    return Instruction("JEZ", (i, k))


def JMEM(i, j, k):
    return Instruction("JMEM", (i, j, k))


def POW(i, j):
    return Instruction("POW", (i, j))


def ORACLE(i, j):
    return Instruction("ORACLE", (i, j))


def GOTO(k):
    return Instruction("GOTO", (k,))


def JEQ(i, j, k):
    return Instruction("JEQ", (i, j, k))


def required_flavor(lines: Iterable[Instruction]) -> Flavor:
    flavor = Flavor.SRM
    for ins in lines:
        if ins.op == "ORACLE":
            return Flavor.SRM_ORACLE
        if ins.op == "POW":
            flavor = Flavor.SRM_PLUS
    return flavor


@dataclass(frozen=True)
class Program:
    """A macro-free program.  Line ``n`` (1-based) is ``lines[n - 1]``."""

    lines: tuple
    flavor: Flavor = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if self.flavor is None:
            object.__setattr__(self, "flavor", required_flavor(self.lines))
        if any(ins.is_macro for ins in self.lines):
            raise AsmError("Program may not contain macros; use expand_macros")

    def __len__(self) -> int:
        return len(self.lines)

    @functools.cached_property
    def num_registers(self) -> int:
        return 1 + max((r for ins in self.lines for r in ins.registers), default=0)


@dataclass(frozen=True)
class MacroProgram:
    lines: tuple
    flavor: Optional[Flavor] = None

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))

    def __len__(self) -> int:
        return len(self.lines)

    @property
    def effective_flavor(self) -> Flavor:
        inferred = required_flavor(self.lines)
        return max(inferred, self.flavor) if self.flavor is not None else inferred


# --- text format ----------------------------------------------------------------

_LINE = re.compile(r"^(?:(\d+)\s*:)?\s*([A-Za-z]+)((?:\s+\d+)*)\s*$")


def assemble(text: str) -> MacroProgram:
    lines: list[Instruction] = []
    flavor = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("."):
            parts = body.split()
            if parts[0] != ".flavor" or len(parts) != 2 or parts[1].upper() not in _FLAVOR_BY_LABEL:
                raise ParseError(f"bad directive {body!r}", lineno)
            flavor = _FLAVOR_BY_LABEL[parts[1].upper()]
            continue
        m = _LINE.match(body)
        if not m:
            raise ParseError(f"cannot parse {body!r}", lineno)
        label, op, operands = m.groups()
        if label is not None and int(label) != len(lines) + 1:
            raise BadLineNumber(f"label {label} but this is program line {len(lines) + 1}", lineno)
        op = op.upper()
        try:
            ins = Instruction(op, tuple(int(x) for x in operands.split()))
        except AsmError as exc:
            raise ParseError(str(exc), lineno) from None
        lines.append(ins)
    return MacroProgram(tuple(lines), flavor)


def disassemble(p: Union[Program, MacroProgram]) -> str:
    out = []
    declared = p.flavor
    if declared is not None and declared != required_flavor(p.lines):
        out.append(f".flavor {declared.label}")
    out.extend(f"{n}: {ins}" for n, ins in enumerate(p.lines, start=1))
    return "\n".join(out) + "\n"


# --- macros ------------------------------------------------------------------------


def _equality_block(i: int, j: int, scratch: tuple, z: int, start: int, on_equal: int) -> list:
    """Non-destructive ``IF R_i = R_j THEN GO TO on_equal`` at ``start``.

    Runs the take/check/remove loop of the equality program on copies in the
    scratch registers ``a, b, c``; ``z`` is a register nothing writes to.
    """
    a, b, c = scratch
    s = start
    after = s + 12
    return [
        COPY(i, a),
        COPY(j, b),
        JEZ(a, s + 4),
        JEZ(z, s + 6),
        JEZ(b, on_equal),
        JEZ(z, after),
        TAKE(a, c),
        REMOVE(c, a),
        JMEM(c, b, s + 10),
        JEZ(z, after),
        REMOVE(c, b),
        JEZ(z, s + 2),
    ]


_MACRO_SIZE = {"GOTO": 1, "JEQ": 12}


def expand_macros(mp: Union[MacroProgram, Program], reserved: int = 0) -> Program:
    """Replace GOTO and JEQ by core instructions.

    GOTO k becomes ``JEZ z k`` for a register ``z`` above every register the
    source mentions and above the ``reserved`` input registers; JEQ inlines
    a non-destructive equality test on scratch registers above ``z``.  Jump targets are moved to the new line numbers;
    out-of-range targets stay out of range.
    """
    if isinstance(mp, Program):
        return mp
    lines = mp.lines
    top = max((r for ins in lines for r in ins.registers), default=-1)
    z = max(top, reserved - 1, 0) + 1  # R0 is never used as scratch
    scratch = (z + 1, z + 2, z + 3)
    starts = []
    pos = 1
    for ins in lines:
        starts.append(pos)
        pos += _MACRO_SIZE.get(ins.op, 1)
    old_len, new_len = len(lines), pos - 1

    def move(t: int) -> int:
        if 1 <= t <= old_len:
            return starts[t - 1]
        if t > old_len:
            return new_len + (t - old_len)
        return t

    out: list[Instruction] = []
    for ins, start in zip(lines, starts):
        if ins.op == "GOTO":
            out.append(JEZ(z, move(ins.args[0])))
        elif ins.op == "JEQ":
            i, j, k = ins.args
            out.extend(_equality_block(i, j, scratch, z, start, move(k)))
        elif ins.target is not None:
            out.append(ins.retarget(move(ins.target)))
        else:
            out.append(ins)
    return Program(tuple(out), mp.effective_flavor)


# --- validation -----------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: line {self.line}: {self.message}"


def validate(p: Union[Program, MacroProgram], flavor: Optional[Flavor] = None) -> list[Diagnostic]:
    """Diagnostics for ``p``; flavor violations and empty programs are errors.

    Jumps outside ``[1, len + 1]`` are legal (they halt) and only warned about.
    """
    diags = []
    declared = flavor if flavor is not None else p.flavor
    if not p.lines:
        diags.append(Diagnostic("error", 0, "empty program"))
    for n, ins in enumerate(p.lines, start=1):
        if ins.op == "POW" and declared == Flavor.SRM:
            diags.append(Diagnostic("error", n, "POW is not an SRM instruction"))
        if ins.op == "ORACLE" and declared is not None and declared != Flavor.SRM_ORACLE:
            diags.append(Diagnostic("error", n, "ORACLE requires an oracle machine"))
        t = ins.target
        if t is not None and not 1 <= t <= len(p.lines) + 1:
            diags.append(Diagnostic("warning", n, f"jump target {t} is outside the program (halts)"))
    return diags


def check_valid(p: Union[Program, MacroProgram], flavor: Optional[Flavor] = None) -> None:
    errors = [d for d in validate(p, flavor) if d.severity == "error"]
    if errors:
        raise FlavorViolation("; ".join(map(str, errors)))


# --- program codes -----------------------------------------------------------------------


def _instr_code(ins: Instruction) -> HfSet:
    code, kinds = OPCODES[ins.op]
    slots = [0, 0, 0]
    regs = [a for k, a in zip(kinds, ins.args) if k == "r"]
    slots[: len(regs)] = regs
    if ins.target is not None:
        slots[2] = ins.target
    n = hf.numeral
    return hf.ordered_pair(n(code), hf.ordered_pair(n(slots[0]), hf.ordered_pair(n(slots[1]), n(slots[2]))))


def encode_program(p: Program) -> HfSet:
    """The function ``{<#line, <#op, <#i, <#j, #k>>>>}`` over line numerals."""
    if isinstance(p, MacroProgram):
        raise AsmError("expand macros before encoding")
    return hf.make_function((hf.numeral(n), _instr_code(ins)) for n, ins in enumerate(p.lines, start=1))


def _nat(a: HfSet) -> int:
    n = hf.to_natural(a)
    if n is None:
        raise MalformedCode(f"expected a numeral, got {a}")
    return n


def _unpair(a: HfSet) -> tuple:
    if not hf.is_ordered_pair(a):
        raise MalformedCode(f"expected an ordered pair, got {a}")
    return hf.proj1(a), hf.proj2(a)


def decode_program(a: HfSet, flavor: Optional[Flavor] = None) -> Program:
    if not a or not hf.is_function(a):
        raise MalformedCode("a program code is a nonempty function")
    entries = {}
    for p in a:
        line, code = _unpair(p)
        entries[_nat(line)] = code
    if sorted(entries) != list(range(1, len(entries) + 1)):
        raise MalformedCode("line numbers must be 1..n")
    lines = []
    for n in range(1, len(entries) + 1):
        op_set, rest = _unpair(entries[n])
        i_set, rest = _unpair(rest)
        j_set, k_set = _unpair(rest)
        op = _nat(op_set)
        if op not in _BY_OPCODE:
            raise MalformedCode(f"unknown opcode {op}")
        name = _BY_OPCODE[op]
        kinds = OPCODES[name][1]
        slots = [_nat(i_set), _nat(j_set), _nat(k_set)]
        nregs = kinds.count("r")
        args = slots[:nregs]
        if "l" in kinds:
            args.append(slots[2])
        used = set(range(nregs)) | ({2} if "l" in kinds else set())
        if any(slots[s] for s in range(3) if s not in used):
            raise MalformedCode(f"line {n}: nonzero unused operand")
        try:
            lines.append(Instruction(name, tuple(args)))
        except AsmError as exc:
            raise MalformedCode(str(exc)) from None
    return Program(tuple(lines), flavor)


# --- building programs with labels -------------------------------------------------------------


@dataclass
class Label:
    name: str
    ident: int

    def __hash__(self) -> int:
        return self.ident


class Builder:
    """Incremental program construction with symbolic labels.

    Registers below ``reserved`` belong to the caller (inputs); ``fresh()``
    hands out new ones above them.  ``inline()`` splices in a whole program as
    a subroutine on a private register block.
    """

    def __init__(self, reserved: int = 1):
        self.items: list = []
        self.next_reg = reserved
        self._labels = 0
        self._placed: dict[int, int] = {}

    def fresh(self) -> int:
        self.next_reg += 1
        return self.next_reg - 1

    def fresh_block(self, n: int) -> list[int]:
        return [self.fresh() for _ in range(n)]

    def label(self, name: str = "L") -> Label:
        self._labels += 1
        return Label(name, self._labels)

    def place(self, label: Label) -> None:
        if label.ident in self._placed:
            raise AsmError(f"label {label.name} placed twice")
        self._placed[label.ident] = len(self.items) + 1

    def emit(self, op: str, *args) -> None:
        self.items.append((op, args))

    def goto(self, label: Label) -> None:
        self.emit("GOTO", label)

    def set_true(self, reg: int) -> None:
        self.emit("ZERO", reg)
        self.emit("ADD", reg, reg)

    def inline(self, prog: Union[Program, MacroProgram], args: Sequence[int], out: int) -> None:
        """Run ``prog`` on the values of ``args``; its R0 result lands in ``out``.

        The subprogram's registers are mapped to a fresh block that is zeroed
        first, so it starts from the same state as a standalone run.
        """
        prog = expand_macros(prog, len(args))
        width = max(prog.num_registers, len(args))
        block = self.fresh_block(width)
        for r in block:
            self.emit("ZERO", r)
        for r, a in zip(block, args):
            self.emit("COPY", a, r)
        after = self.label("after")
        base = len(self.items)
        n = len(prog.lines)
        for ins in prog.lines:
            kinds = _kinds(ins.op)
            new_args = []
            for k, a in zip(kinds, ins.args):
                if k == "r":
                    new_args.append(block[a])
                else:
                    new_args.append(("abs", base + a) if 1 <= a <= n else after)
            self.items.append((ins.op, tuple(new_args)))
        self.place(after)
        self.emit("COPY", block[0], out)

    def build(self, flavor: Optional[Flavor] = None) -> MacroProgram:
        lines = []
        for op, args in self.items:
            resolved = []
            for a in args:
                if isinstance(a, Label):
                    resolved.append(self._placed.get(a.ident, None) or _missing(a))
                elif isinstance(a, tuple):
                    resolved.append(a[1])
                else:
                    resolved.append(a)
            lines.append(Instruction(op, tuple(resolved)))
        return MacroProgram(tuple(lines), flavor)


def _missing(label: Label):
    raise AsmError(f"label {label.name} was never placed")
