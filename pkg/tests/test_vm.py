import random

import pytest

from srm import hfset as hf
from srm import stdlib
from srm.asm import Program, assemble, expand_macros
from srm.hfset import EMPTY
from srm.vm import (
    HALT,
    ORACLE_UNDEFINED,
    Configuration,
    Halted,
    NoCycleAtBudget,
    OmegaMarker,
    OracleDiverged,
    ResourceExceeded,
    RunError,
    RunLimits,
    StepBudgetExhausted,
    Trace,
    check_trace,
    format_oracle_table,
    format_trace,
    initial_configuration,
    limit_configuration,
    parse_oracle_table,
    parse_trace,
    run,
    run_as_function,
    step,
)

from programs import CORE_OPS, cycling_programs, random_program, small_inputs

ONE, TWO = hf.numeral(1), hf.numeral(2)
EQ = stdlib.get("eq").program


def C(line, *regs):
    return Configuration(line, tuple(regs))


def test_step_examples():
    assert step(assemble("ADD 0 0"), C(1, EMPTY)) == C(2, ONE)
    assert step(assemble("TAKE 0 1"), C(1, EMPTY, ONE)) == C(2, EMPTY, ONE)
    assert step(assemble("ADD 0 0"), C(2, EMPTY)) is HALT
    assert step(assemble("ADD 0 0"), C(0, EMPTY)) is HALT
    assert step(assemble("ORACLE 0 0"), C(1, ONE), {EMPTY: ONE}) is ORACLE_UNDEFINED
    assert step(assemble("ORACLE 0 0"), C(1, ONE), {ONE: TWO}) == C(2, TWO)


def test_step_clauses():
    a = hf.parse_hf("{#0,{#1}}")
    p = Program(tuple(assemble("ZERO 0\nADD 0 1\nCOPY 0 1\nTAKE 0 1\nREMOVE 0 1\nJEZ 0 9\nJMEM 0 1 9\nPOW 0 1").lines))
    c = lambda n, r0, r1: C(n, r0, r1)
    assert step(p, c(1, a, ONE)) == c(2, EMPTY, ONE)
    assert step(p, c(2, a, ONE)) == c(3, a, hf.add_element(a, ONE))
    assert step(p, c(3, a, ONE)) == c(4, a, a)
    assert step(p, c(4, a, ONE)) == c(5, a, EMPTY)
    assert step(p, c(5, EMPTY, TWO)) == c(6, EMPTY, hf.parse_hf("{#1}"))
    assert step(p, c(6, EMPTY, ONE)) == c(9, EMPTY, ONE)
    assert step(p, c(6, ONE, ONE)) == c(7, ONE, ONE)
    assert step(p, c(7, EMPTY, ONE)) == c(9, EMPTY, ONE)
    assert step(p, c(7, ONE, ONE)) == c(8, ONE, ONE)
    # POW writes register j only
    assert step(p, c(8, ONE, EMPTY)) == c(9, ONE, TWO)


def test_frame_condition():
    rng = random.Random(3)
    ops = CORE_OPS + ["POW"]
    limits = RunLimits(max_powerset_input=5)
    for _ in range(300):
        p = expand_macros(random_program(rng, 6, 4, ops))
        c = initial_configuration(p, small_inputs(rng, 4))
        for _ in range(20):
            try:
                nxt = step(p, c, limits=limits)
            except hf.ResourceExceeded:
                break
            if not isinstance(nxt, Configuration):
                break
            changed = [i for i, (x, y) in enumerate(zip(c.registers, nxt.registers)) if x is not y]
            assert len(changed) <= 1
            c = nxt


def test_run_examples():
    assert run(EQ, [ONE, ONE])[0].value is ONE
    assert run(EQ, [EMPTY, ONE])[0].value is EMPTY
    out, _ = run(assemble("ADD 0 0\nGOTO 1"), limits=RunLimits(max_steps=500))
    assert isinstance(out, NoCycleAtBudget) and out.steps == 500
    out, trace = run(assemble("ZERO 1\nADD 0 1\nREMOVE 0 1\nGOTO 2"), [ONE])
    assert isinstance(out, StepBudgetExhausted)
    marker_at = next(i for i, e in enumerate(trace.entries) if isinstance(e, OmegaMarker))
    assert trace.entries[marker_at + 1] == C(2, ONE, EMPTY, EMPTY)


def test_run_as_function():
    assert run_as_function(EQ, [TWO, TWO]) is ONE
    with pytest.raises(RunError) as info:
        run_as_function(assemble("ORACLE 0 0"), [ONE])
    assert isinstance(info.value.outcome, OracleDiverged)


def test_outcomes():
    out, _ = run(assemble("ZERO 0\nORACLE 1 0"), [ONE, TWO], {ONE: ONE})
    assert out == OracleDiverged(2, TWO)
    out, _ = run(assemble("POW 0 0\nPOW 0 0\nPOW 0 0"), [TWO], limits=RunLimits(max_powerset_input=4))
    assert isinstance(out, ResourceExceeded) and out.at_line == 3
    out, _ = run(assemble("GOTO 1"), limits=RunLimits(max_limit_jumps=3))
    assert isinstance(out, StepBudgetExhausted) and out.limit_jumps == 3


def test_limit_configuration():
    cycle = [C(4, ONE, TWO), C(2, EMPTY, TWO), C(3, ONE, ONE)]
    assert limit_configuration(cycle) == C(2, EMPTY, ONE)


def test_cycling_programs_jump_to_hand_computed_limits():
    for name, p, inputs, oracle, (line, regs) in cycling_programs():
        _, trace = run(p, inputs, oracle)
        i = next(k for k, e in enumerate(trace.entries) if isinstance(e, OmegaMarker))
        after = trace.entries[i + 1]
        assert after.line == line, name
        for r, value in regs.items():
            assert after.registers[r] is value, (name, r)


def test_determinism():
    rng = random.Random(5)
    for _ in range(50):
        p = random_program(rng, 8, 4)
        inputs = small_inputs(rng, 2)
        a = run(p, inputs, limits=RunLimits(max_steps=300))
        b = run(p, inputs, limits=RunLimits(max_steps=300))
        assert a[0] == b[0] and a[1].entries == b[1].entries


def test_registers_cover_inputs():
    assert run(assemble("COPY 1 0"), [EMPTY, TWO, ONE])[0].value is TWO
    assert initial_configuration(expand_macros(assemble("ZERO 0")), [ONE, ONE]).registers == (ONE, ONE)


def test_check_trace_accepts_runs_and_rejects_truncation():
    rng = random.Random(7)
    accepted = 0
    for _ in range(200):
        p = random_program(rng, 7, 4, CORE_OPS + ["GOTO"])
        inputs = small_inputs(rng, 2)
        out, trace = run(p, inputs, limits=RunLimits(max_steps=400))
        if not isinstance(out, Halted):
            continue
        assert check_trace(p, trace, inputs=inputs)
        assert check_trace(p, trace)
        accepted += 1
        if len(trace.entries) > 1:
            assert not check_trace(p, Trace(trace.entries[:-1]), inputs=inputs)
    assert accepted > 50


def test_check_trace_with_limits_and_oracles():
    for name, p, inputs, oracle, _ in cycling_programs():
        out, trace = run(p, inputs, oracle)
        if isinstance(out, Halted):
            assert check_trace(p, trace, oracle, inputs), name
    _, trace = run(assemble("ORACLE 0 0"), [ONE], {ONE: TWO})
    assert check_trace(assemble("ORACLE 0 0"), trace, {ONE: TWO})
    assert not check_trace(assemble("ORACLE 0 0"), trace, {ONE: ONE})
    assert not check_trace(assemble("ORACLE 0 0"), trace, {})


def test_check_trace_rejects_bad_markers():
    name, p, inputs, oracle, _ = next(cycling_programs())
    out, trace = run(p, inputs, oracle)
    assert isinstance(out, Halted)
    i = next(k for k, e in enumerate(trace.entries) if isinstance(e, OmegaMarker))
    m = trace.entries[i]
    for bad in [OmegaMarker(m.prefix + 1, m.period), OmegaMarker(m.prefix, m.period - 1)]:
        entries = list(trace.entries)
        entries[i] = bad
        assert not check_trace(p, Trace(entries), oracle, inputs)
    entries = list(trace.entries)
    del entries[i]
    assert not check_trace(p, Trace(entries), oracle, inputs)


def test_trace_text_round_trip():
    for name, p, inputs, oracle, _ in cycling_programs():
        _, trace = run(p, inputs, oracle, limits=RunLimits(max_limit_jumps=2))
        text = format_trace(trace)
        assert parse_trace(text).entries == trace.entries
    assert "@omega prefix=" in text


def test_oracle_table_text():
    table = {ONE: TWO, EMPTY: hf.parse_hf("{{∅}}")}
    assert parse_oracle_table(format_oracle_table(table)) == table
    assert parse_oracle_table("# comment\n#1 => #2\n\n") == {ONE: TWO}
    with pytest.raises(ValueError):
        parse_oracle_table("#1 -> #2")


def test_oracle_extension_keeps_halted_values():
    rng = random.Random(12)
    checked = 0
    for _ in range(300):
        p = random_program(rng, 6, 3, CORE_OPS + ["ORACLE"])
        base = {hf.random_hf(rng, 2): hf.random_hf(rng, 2) for _ in range(3)}
        inputs = small_inputs(rng, 2)
        out, _ = run(p, inputs, base, limits=RunLimits(max_steps=300))
        if not isinstance(out, Halted):
            continue
        bigger = dict(base)
        for _ in range(4):
            bigger.setdefault(hf.random_hf(rng, 3), hf.random_hf(rng, 2))
        out2, _ = run(p, inputs, bigger, limits=RunLimits(max_steps=300))
        assert out2 == out
        checked += 1
    assert checked >= 50


def test_limits_from_environment(monkeypatch):
    monkeypatch.setenv("SRM_DEFAULT_LIMITS", "max_steps=10,max_limits=2,max_pow=4")
    assert RunLimits.from_env() == RunLimits(10, 2, 4)
    monkeypatch.setenv("SRM_DEFAULT_LIMITS", "")
    assert RunLimits.from_env() == RunLimits()
    monkeypatch.setenv("SRM_DEFAULT_LIMITS", "steps=3")
    with pytest.raises(ValueError):
        RunLimits.from_env()
    with pytest.raises(ValueError):
        RunLimits(max_steps=0)
