import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srm import hfset as hf
from srm.hfset import EMPTY, Ordering

import oracles

E = EMPTY
ONE = hf.numeral(1)
TWO = hf.numeral(2)
S = hf.singleton


def P(text):
    return hf.parse_hf(text)


# sets drawn by Ackermann code keep hypothesis shrinking meaningful
codes = st.integers(min_value=0, max_value=(1 << 16) - 1)
sets = codes.map(hf.f_tau)


# --- construction and canonicity --------------------------------------------------


def test_make_set_examples():
    assert hf.make_set([]) is E
    assert hf.make_set([E, E]) is ONE
    ab = hf.make_set([ONE, E])
    assert ab.elements == (E, ONE)


def test_identity_is_extensional_equality():
    a = hf.make_set([S(E), E, TWO])
    b = hf.make_set([TWO, E, S(E), E])
    assert a is b
    assert hf.make_set(a) is a


@given(codes)
def test_round_trip_through_frozensets(n):
    fs = oracles.from_code(n)
    a = oracles.from_frozen(fs)
    assert oracles.to_frozen(a) == fs
    assert a.rank == oracles.rank(fs)


# --- the Ackermann order ------------------------------------------------------------


def test_ack_compare_examples():
    assert hf.ack_compare(E, ONE) is Ordering.LT
    assert hf.ack_compare(ONE, ONE) is Ordering.EQ
    # codes 2 and 3
    assert hf.ack_compare(P("{{∅}}"), P("{∅,{∅}}")) is Ordering.LT


@given(codes, codes)
def test_ack_compare_matches_code_order(m, n):
    a, b = hf.f_tau(m), hf.f_tau(n)
    expected = Ordering.LT if m < n else Ordering.GT if m > n else Ordering.EQ
    assert hf.ack_compare(a, b) is expected


@given(sets, sets)
def test_rank_monotone(a, b):
    if a.rank < b.rank:
        assert hf.ack_compare(a, b) is Ordering.LT


def test_f_tau_against_code_oracle():
    for n in range(1000):
        assert oracles.to_frozen(hf.f_tau(n)) == oracles.from_code(n)
        assert hf.f_tau_inv(hf.f_tau(n)) == n


def test_f_tau_examples():
    assert hf.f_tau(0) is E
    assert hf.f_tau(1) is ONE
    assert hf.f_tau(2) is P("{{∅}}")
    assert hf.f_tau(3) is TWO


def test_take_least():
    assert hf.take_least(TWO) is E
    assert hf.take_least(E) is None
    assert hf.take_least(P("{{{∅}},{∅}}")) is ONE


# --- set algebra ----------------------------------------------------------------------


def test_algebra_examples():
    assert hf.union2(ONE, P("{{∅}}")) is TWO
    assert hf.intersect2(ONE, P("{{∅}}")) is E
    assert hf.diff_singleton(E, TWO) is P("{{∅}}")
    assert hf.add_element(ONE, ONE) is TWO
    assert hf.big_union(P("{{∅},{{∅}}}")) is TWO
    assert hf.big_union(E) is E
    assert hf.big_intersect(P("{{∅,{∅}},{∅}}")) is ONE
    with pytest.raises(hf.EmptyIntersection):
        hf.big_intersect(E)


@given(sets, sets)
def test_binary_operations_against_frozensets(a, b):
    fa, fb = oracles.to_frozen(a), oracles.to_frozen(b)
    assert oracles.to_frozen(hf.union2(a, b)) == fa | fb
    assert oracles.to_frozen(hf.intersect2(a, b)) == fa & fb
    assert oracles.to_frozen(hf.difference(a, b)) == fa - fb
    assert hf.is_subset(a, b) == (fa <= fb)
    assert hf.is_member(a, b) == (fa in fb)
    assert oracles.to_frozen(hf.add_element(a, b)) == fb | {fa}
    assert oracles.to_frozen(hf.diff_singleton(a, b)) == fb - {fa}


@given(sets)
def test_unary_operations_against_frozensets(a):
    fa = oracles.to_frozen(a)
    assert oracles.to_frozen(hf.big_union(a)) == frozenset().union(*fa)
    if fa:
        assert oracles.to_frozen(hf.big_intersect(a)) == frozenset.intersection(*fa)
    assert hf.is_ordinal(a) == oracles.is_ordinal(fa)
    assert hf.is_transitive(a) == oracles.is_transitive(fa)


def test_powerset():
    assert hf.powerset(E) is ONE
    assert hf.powerset(ONE) is TWO
    assert oracles.to_frozen(hf.powerset(TWO)) == oracles.powerset(oracles.numeral(2))
    assert len(hf.powerset(TWO)) == 4
    with pytest.raises(hf.ResourceExceeded):
        hf.powerset(hf.numeral(5), size_limit=16)


@given(codes.filter(lambda n: n < 1 << 12))
def test_powerset_against_frozensets(n):
    a = hf.f_tau(n)
    if len(a) <= 8:
        assert oracles.to_frozen(hf.powerset(a)) == oracles.powerset(oracles.to_frozen(a))


# --- pairs, functions, numerals --------------------------------------------------------


def test_pairs_and_functions():
    assert hf.ordered_pair(E, ONE) is P("{{∅},{∅,{∅}}}")
    assert P("<∅,#1>") is hf.ordered_pair(E, ONE)
    bad = hf.make_set([hf.ordered_pair(E, E), hf.ordered_pair(E, ONE)])
    assert not hf.is_function(bad)
    f = hf.make_function([(E, ONE), (ONE, TWO)])
    assert hf.is_function(f)
    assert hf.domain(f) is TWO
    assert hf.apply(f, ONE) is TWO
    with pytest.raises(hf.MalformedValue):
        hf.proj1(TWO)
    with pytest.raises(hf.MalformedValue):
        hf.domain(bad)


@given(sets, sets)
def test_pairing_laws(a, b):
    p = hf.ordered_pair(a, b)
    assert oracles.to_frozen(p) == oracles.kpair(oracles.to_frozen(a), oracles.to_frozen(b))
    assert hf.is_ordered_pair(p)
    assert hf.proj1(p) is a and hf.proj2(p) is b
    # the intersection of a Kuratowski pair is {a}; intersecting again recovers a
    assert hf.big_intersect(hf.big_intersect(p)) is a
    assert hf.big_union(p) is hf.pair(a, b)


def test_numerals():
    assert hf.numeral(2) is P("{∅,{∅}}")
    assert hf.to_natural(TWO) == 2
    assert hf.to_natural(P("{{∅}}")) is None
    assert not hf.is_ordinal(P("{{∅}}"))
    for n in range(12):
        assert oracles.to_frozen(hf.numeral(n)) == oracles.numeral(n)
        assert hf.is_ordinal(hf.numeral(n))


def test_sequences():
    values = [TWO, E, ONE]
    s = hf.make_sequence(values)
    assert hf.is_ord_sequence(s)
    assert hf.sequence_values(s) == values
    assert hf.make_sequence([]) is E


# --- limits -----------------------------------------------------------------------------


def test_liminf_examples():
    assert hf.liminf_formula([TWO]) is TWO
    # β = 0: ∅∩{∅}∩∅, β = 1: {∅}∩∅, β = 2 (clamped): ∅
    assert hf.liminf_formula([ONE, E, ONE, E]) is E
    assert hf.liminf_formula([E, ONE, ONE]) is ONE
    assert hf.liminf_cycle([ONE]) is ONE
    assert hf.liminf_cycle([TWO, ONE]) is ONE
    assert hf.liminf_cycle([ONE, P("{{∅}}")]) is E


@settings(max_examples=60)
@given(st.lists(sets, min_size=0, max_size=3), st.lists(sets, min_size=1, max_size=4))
def test_liminf_cycle_matches_characteristic_liminf(prefix, cycle):
    stream = [oracles.to_frozen(x) for x in prefix + cycle * 3]
    start = len(prefix) + len(cycle)
    expected = oracles.char_liminf(stream, start)
    assert oracles.to_frozen(hf.liminf_cycle(cycle)) == expected
    # the displayed formula on unrollings ending at each cycle position
    p = len(cycle)
    rotations = [prefix + cycle * 2 + cycle[: i + 1] for i in range(p)]
    meet = hf.liminf_formula(rotations[0])
    for r in rotations[1:]:
        meet = hf.intersect2(meet, hf.liminf_formula(r))
    assert oracles.to_frozen(meet) == expected


# --- cumulative hierarchy -------------------------------------------------------------


def test_v_stages():
    assert hf.v_stage(2) is TWO
    sizes = [len(hf.v_stage(n)) for n in range(5)]
    assert sizes == [0, 1, 2, 4, 16]
    for n in range(1, 5):
        assert sizes[n] == 2 ** sizes[n - 1]
        assert oracles.to_frozen(hf.v_stage(n)) == oracles.v_stage(n)
    # V_n is exactly the sets with code below 2^|V_(n-1)|
    assert list(hf.v_stage(4)) == [hf.f_tau(i) for i in range(16)]


# --- literals and random generation -----------------------------------------------------


@given(sets)
def test_literal_round_trip(a):
    assert hf.parse_hf(hf.format_hf(a)) is a
    assert hf.parse_hf(hf.format_hf(a, ascii=True)) is a


def test_literal_syntax():
    assert P(" { } ") is E
    assert P("{#0, #1}") is TWO
    assert P("{{}, {{}}}") is TWO
    for bad in ["{", "{∅,", "#", "<∅>", "∅ ∅", "{x}"]:
        with pytest.raises(hf.HfParseError):
            P(bad)


def test_random_hf_is_seeded_and_rank_bounded():
    a = [hf.random_hf(random.Random(7), 3) for _ in range(2)]
    assert a[0] is a[1]
    rng = random.Random(1)
    assert all(hf.random_hf(rng, 3).rank <= 3 for _ in range(500))
