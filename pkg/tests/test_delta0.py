import random

import pytest

from srm import hfset as hf
from srm.delta0 import (
    NotDelta0,
    UnboundVariable,
    compile_delta0,
    eval_delta0,
    eval_sigma1,
    fuzz,
    random_delta0,
    split_sigma1,
)
from srm.lang import parse_setformula as F
from srm.vm import run, run_as_function

import oracles

E, ONE, TWO = hf.EMPTY, hf.numeral(1), hf.numeral(2)


def test_eval_examples():
    assert eval_delta0(F("x in y"), {"x": E, "y": ONE})
    # {∅} is a member of a but belongs to no member of a
    assert not eval_delta0(F("forall x in a . exists y in a . x in y"), {"a": TWO})
    assert not eval_delta0(F("bot"), {})
    assert eval_delta0(F("x = #2"), {"x": TWO})


def test_eval_errors():
    with pytest.raises(NotDelta0):
        eval_delta0(F("exists y . x in y"), {"x": E})
    with pytest.raises(UnboundVariable):
        eval_delta0(F("x in y"), {"x": E})


def _brute(f, env):
    """Truth by recursion on frozensets, sharing no code with the evaluator."""
    kind = type(f).__name__
    val = lambda t: oracles.to_frozen(t.value) if hasattr(t, "value") else env[t.name]
    if kind == "Eq":
        return val(f.left) == val(f.right)
    if kind == "In":
        return val(f.left) in val(f.right)
    if kind == "Bot":
        return False
    if kind == "And":
        return _brute(f.left, env) and _brute(f.right, env)
    if kind == "Or":
        return _brute(f.left, env) or _brute(f.right, env)
    if kind == "Imp":
        return not _brute(f.left, env) or _brute(f.right, env)
    test = any if kind == "BExists" else all
    return test(_brute(f.body, {**env, f.var: m}) for m in val(f.bound))


def test_eval_against_frozenset_oracle():
    rng = random.Random(21)
    for _ in range(400):
        f = random_delta0(rng, 3, ["x", "y"])
        env = {"x": hf.random_hf(rng, 3), "y": hf.random_hf(rng, 3)}
        frozen = {k: oracles.to_frozen(v) for k, v in env.items()}
        assert eval_delta0(f, env) == _brute(f, frozen)


def test_sigma1_examples():
    r = eval_sigma1(F("exists z . x in z"), {"x": E}, 10)
    assert r.found and r.witness == {"z": ONE}
    assert not eval_sigma1(F("exists z . z in z"), {}, 200).found
    assert eval_sigma1(F("x in y"), {"x": E, "y": ONE}, 1).found
    assert not eval_sigma1(F("x in y"), {"x": ONE, "y": ONE}, 50).found
    assert str(eval_sigma1(F("exists z . z in z"), {}, 5)) == "unknown"


def test_sigma1_witnesses_are_sound():
    rng = random.Random(2)
    for _ in range(150):
        matrix = random_delta0(rng, 2, ["x", "w"])
        f = F("exists w . bot")
        f = type(f)("w", matrix)
        env = {"x": hf.random_hf(rng, 2)}
        r = eval_sigma1(f, env, 16)
        if r.found:
            assert eval_delta0(matrix, {**env, **r.witness})
    names, body = split_sigma1(F("exists a . exists b . a in b"))
    assert names == ["a", "b"] and str(body) == "a in b"


def test_compile_examples():
    p = compile_delta0(F("x = x"), ["x"])
    rng = random.Random(1)
    for _ in range(20):
        assert run_as_function(p, [hf.random_hf(rng, 3)]) is ONE
    q = compile_delta0(F("x in y"), ["x", "y"])
    assert run_as_function(q, [E, ONE]) is ONE
    assert run_as_function(q, [ONE, ONE]) is E


def test_compile_errors():
    with pytest.raises(NotDelta0):
        compile_delta0(F("exists y . x in y"), ["x"])
    with pytest.raises(UnboundVariable):
        compile_delta0(F("x in y"), ["x"])
    with pytest.raises(ValueError):
        compile_delta0(F("x in x"), ["x", "x"])


def test_compiled_programs_halt_without_limits_and_keep_arguments():
    rng = random.Random(8)
    for _ in range(150):
        f = random_delta0(rng, 3, ["x", "y", "z"])
        args = [hf.random_hf(rng, 3) for _ in range(3)]
        out, trace = run(compile_delta0(f, ["x", "y", "z"]), args)
        assert out.halted and out.limit_jumps == 0
        final = trace.entries[-1]
        assert final.registers[1:3] == tuple(args[1:3])


def test_fuzz_report():
    report = fuzz(200, seed=4)
    assert not report.mismatches
    assert str(report).startswith("delta0 fuzz: cases=200 mismatches=0")
