import random
from importlib import resources

import pytest

from srm import hfset as hf
from srm import stdlib
from srm.asm import Flavor, check_valid
from srm.stdlib import build
from srm.vm import RunError, RunLimits

P = hf.parse_hf
ONE = hf.numeral(1)


def test_catalogue():
    names = stdlib.list_entries()
    assert len(names) == 27
    assert set(stdlib.LEMMA_ENTRIES) <= set(names)
    with pytest.raises(stdlib.UnknownName):
        stdlib.get("no_such_entry")


def test_transcribed_listing_lengths():
    assert len(stdlib.get("eq").program.lines) == 14
    assert len(stdlib.get("union2").program.lines) == 5
    assert len(stdlib.get("intersect2").program.lines) == 8
    assert len(stdlib.get("vstage").program.lines) == 5
    for name in build.TRANSCRIBED:
        assert stdlib.get(name).transcribed


def test_entries_validate_under_their_flavor():
    for name in stdlib.list_entries():
        e = stdlib.get(name)
        check_valid(e.program, e.flavor)
        uses_pow = any(ins.op == "POW" for ins in e.program.lines)
        assert (e.flavor is Flavor.SRM_PLUS) == uses_pow, name


def test_shipped_files_match_the_generator():
    folder = resources.files("srm.stdlib") / "programs"
    for name in build.AUTHORED:
        assert (folder / f"{name}.srm").read_text() == build.render(name), name


def test_run_entry_examples():
    v3 = stdlib.run_entry("vstage", [hf.numeral(3)])
    assert v3 is hf.v_stage(3) and len(v3) == 4
    assert stdlib.run_entry("tau_less", [hf.EMPTY, ONE]) is ONE
    assert stdlib.run_entry("tau_less", [ONE, hf.EMPTY]) is hf.EMPTY
    assert stdlib.run_entry("f_tau", [hf.numeral(2)]) is P("{{∅}}")
    assert stdlib.run_entry("eq", [ONE, ONE]) is ONE
    assert stdlib.run_entry("least_sat", [P("{#1, <∅,∅>, <∅,#1>}")]) is hf.ordered_pair(hf.EMPTY, hf.EMPTY)
    f = stdlib.run_entry("choice_fn", [P("{{∅},{{∅}}}")])
    assert hf.apply(f, ONE) is hf.EMPTY
    assert hf.apply(f, P("{{∅}}")) is ONE
    with pytest.raises(ValueError):
        stdlib.run_entry("eq", [ONE])


def test_run_entry_propagates_run_failures():
    with pytest.raises(RunError):
        stdlib.run_entry("pow", [hf.numeral(6)], RunLimits(max_powerset_input=4))


@pytest.mark.parametrize("name", stdlib.list_entries())
def test_differential(name):
    report = stdlib.differential_test(name, 80, 3, seed=17)
    assert report.ok, report.mismatches[:3]


def test_named_differential_examples():
    assert stdlib.differential_test("bigunion", 200, 3, seed=1).ok
    assert stdlib.differential_test("pow", 200, 2, seed=1).ok


def test_eq_is_reflexive_and_symmetric():
    rng = random.Random(4)
    for _ in range(150):
        a, b = hf.random_hf(rng, 3), hf.random_hf(rng, 3)
        assert stdlib.run_entry("eq", [a, a]) is ONE
        assert stdlib.run_entry("eq", [a, b]) is stdlib.run_entry("eq", [b, a])


def test_differential_report_is_seeded():
    a = stdlib.differential_test("union2", 20, 2, seed=3)
    b = stdlib.differential_test("union2", 20, 2, seed=3)
    assert a.samples == b.samples == 20 and a.mismatches == b.mismatches
    assert "union2: samples=20 mismatches=0" in str(a)
