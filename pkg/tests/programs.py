"""Program generators and a curated corpus shared by the vm and acceptance tests."""

from __future__ import annotations

import random

from srm import hfset as hf
from srm.asm import Instruction, MacroProgram, assemble

CORE_OPS = ["ZERO", "ADD", "COPY", "TAKE", "REMOVE", "JEZ", "JMEM"]


def random_instruction(rng: random.Random, n_lines: int, n_regs: int, ops=CORE_OPS) -> Instruction:
    op = rng.choice(ops)
    kinds = {"ZERO": "r", "JEZ": "rl", "JMEM": "rrl", "GOTO": "l", "JEQ": "rrl"}.get(op, "rr")
    args = [rng.randrange(n_regs) if k == "r" else rng.randint(1, n_lines + 1) for k in kinds]
    return Instruction(op, tuple(args))


def random_program(rng: random.Random, n_lines: int, n_regs: int = 4, ops=CORE_OPS) -> MacroProgram:
    return MacroProgram(tuple(random_instruction(rng, n_lines, n_regs, ops) for _ in range(n_lines)))


def small_inputs(rng: random.Random, k: int, max_rank: int = 2) -> list:
    return [hf.random_hf(rng, max_rank) for _ in range(k)]


# Programs whose runs reach a repeated configuration.  Each entry is
# (name, listing, inputs, oracle, expected first limit configuration as
# (line, {register: literal})), with the expectation worked out by hand.
CYCLING = [
    (
        "toggle-exit",
        # R1 swaps between {∅} and {{∅}} and is never empty inside the loop;
        # at the limit it is ∅, so line 3 leaves the loop
        """
        ADD 2 3
        ADD 2 1
        JEZ 1 11
        JMEM 2 1 8
        ZERO 1
        ADD 2 1
        GOTO 3
        ZERO 1
        ADD 3 1
        GOTO 3
        ADD 3 0
        """,
        [],
        None,
        (3, {0: "∅", 1: "∅", 2: "∅", 3: "{∅}"}),
    ),
    (
        "add-remove",
        # R1 alternates between {R0} and ∅
        """
        ZERO 1
        ADD 0 1
        REMOVE 0 1
        GOTO 2
        """,
        ["#1"],
        None,
        (2, {0: "#1", 1: "∅"}),
    ),
    (
        "persistent-member",
        # R1 keeps ∅ throughout and gains/loses {∅}: the limit keeps ∅ only
        """
        ADD 2 1
        ADD 2 3
        ADD 3 1
        REMOVE 3 1
        GOTO 3
        """,
        [],
        None,
        (3, {0: "∅", 1: "{∅}", 2: "∅", 3: "{∅}"}),
    ),
    (
        "power-reset",
        # R1 runs through ∅, {∅}, {∅,{∅}} and is reset; R0 holds its input
        """
        ZERO 1
        ADD 2 1
        POW 1 1
        GOTO 1
        """,
        ["#3"],
        None,
        (1, {0: "#3", 1: "∅", 2: "∅"}),
    ),
    (
        "oracle-swap",
        # the oracle swaps #0 and #1; R0 flips forever
        """
        ORACLE 0 0
        GOTO 1
        """,
        ["#0"],
        {"#0": "#1", "#1": "#0"},
        (1, {0: "∅"}),
    ),
    (
        "two-periods",
        # R1 flips every iteration while the counter R3 steps through
        # ∅, {{∅}}, #2 (R2 is nonempty on one step of three), so the joint
        # cycle spans six iterations; only the constant R4 survives the limit
        """
        ADD 5 4
        JEZ 1 5
        ZERO 1
        GOTO 6
        ADD 4 1
        JMEM 4 3 10
        ADD 4 3
        ZERO 2
        GOTO 2
        JMEM 5 3 14
        ADD 5 3
        ADD 4 2
        GOTO 2
        ZERO 3
        GOTO 2
        """,
        [],
        None,
        (2, {0: "∅", 1: "∅", 2: "∅", 3: "∅", 4: "{∅}", 5: "∅"}),
    ),
]


def cycling_programs():
    for name, text, inputs, oracle, expected in CYCLING:
        table = None if oracle is None else {hf.parse_hf(k): hf.parse_hf(v) for k, v in oracle.items()}
        line, regs = expected
        yield name, assemble(text), [hf.parse_hf(x) for x in inputs], table, (
            line,
            {r: hf.parse_hf(v) for r, v in regs.items()},
        )
