"""Hereditarily finite sets with a canonical, interned representation.

Every :class:`HfSet` is hash-consed: two extensionally equal sets are the same
Python object, so ``a is b`` (and ``a == b``) is extensional equality.
Elements are stored ascending under the Ackermann order, where the code of a
set is ``A(x) = sum(2 ** A(z) for z in x)``.  Codes are never materialized for
comparison; the larger of two sets is the one holding the greatest element of
their symmetric difference.
"""

from __future__ import annotations

import enum
import functools
import random
import weakref
from typing import Iterable, Iterator, Optional, Sequence


class HfError(Exception):
    """Base class for set-kernel errors."""


class ResourceExceeded(HfError):
    """A size budget (power set, V-stage) was exceeded."""


class EmptyIntersection(HfError):
    """The intersection of the empty family was requested."""


class MalformedValue(HfError):
    """A set did not have the shape an operation requires."""


class HfParseError(HfError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class Ordering(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


_table: "weakref.WeakValueDictionary[tuple, HfSet]" = weakref.WeakValueDictionary()


@functools.total_ordering
class HfSet:
    """An immutable hereditarily finite set.

    Do not call the constructor directly; use :func:`make_set` or the other
    operations in this module.
    """

    __slots__ = ("elements", "rank", "__weakref__")

    elements: tuple
    rank: int

    def __new__(cls, elements: tuple = ()):  # pragma: no cover - guarded
        raise TypeError("use make_set() to build HfSet values")

    @classmethod
    def _intern(cls, elements: tuple) -> "HfSet":
        # elements must already be sorted and duplicate free
        obj = _table.get(elements)
        if obj is None:
            obj = object.__new__(cls)
            obj.elements = elements
            obj.rank = elements[-1].rank + 1 if elements else 0
            _table[elements] = obj
        return obj

    def __reduce__(self):
        return (make_set, (self.elements,))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator["HfSet"]:
        return iter(self.elements)

    def __bool__(self) -> bool:
        return bool(self.elements)

    def __contains__(self, item: object) -> bool:
        return isinstance(item, HfSet) and _index(self.elements, item) >= 0

    def __lt__(self, other: "HfSet") -> bool:
        if not isinstance(other, HfSet):
            return NotImplemented
        return _cmp(self, other) < 0

    def __repr__(self) -> str:
        return f"HfSet({format_hf(self)})"

    def __str__(self) -> str:
        return format_hf(self)


def _cmp(a: HfSet, b: HfSet) -> int:
    if a is b:
        return 0
    if a.rank != b.rank:
        return -1 if a.rank < b.rank else 1
    xs, ys = a.elements, b.elements
    i, j = len(xs) - 1, len(ys) - 1
    while i >= 0 and j >= 0:
        x, y = xs[i], ys[j]
        if x is y:
            i -= 1
            j -= 1
            continue
        # the larger of x, y is the greatest element of the symmetric difference
        return _cmp(x, y)
    return 1 if i >= 0 else -1


_key = functools.cmp_to_key(_cmp)


def _index(elements: tuple, item: HfSet) -> int:
    lo, hi = 0, len(elements)
    while lo < hi:
        mid = (lo + hi) // 2
        c = _cmp(elements[mid], item)
        if c == 0:
            return mid
        if c < 0:
            lo = mid + 1
        else:
            hi = mid
    return -(lo + 1)


EMPTY = HfSet._intern(())


def make_set(elems: Iterable[HfSet] = ()) -> HfSet:
    """Return the canonical set whose members are exactly ``elems``."""
    unique = {id(e): e for e in elems}
    for e in unique.values():
        if not isinstance(e, HfSet):
            raise TypeError(f"not an HfSet: {e!r}")
    return HfSet._intern(tuple(sorted(unique.values(), key=_key)))


def ack_compare(a: HfSet, b: HfSet) -> Ordering:
    return Ordering(_cmp(a, b))


def rank(a: HfSet) -> int:
    return a.rank


def take_least(a: HfSet) -> Optional[HfSet]:
    return a.elements[0] if a.elements else None


def is_member(x: HfSet, a: HfSet) -> bool:
    return _index(a.elements, x) >= 0


def add_element(a: HfSet, b: HfSet) -> HfSet:
    """``b ∪ {a}``."""
    pos = _index(b.elements, a)
    if pos >= 0:
        return b
    pos = -pos - 1
    return HfSet._intern(b.elements[:pos] + (a,) + b.elements[pos:])


def diff_singleton(a: HfSet, b: HfSet) -> HfSet:
    """``b ∖ {a}``."""
    pos = _index(b.elements, a)
    if pos < 0:
        return b
    return HfSet._intern(b.elements[:pos] + b.elements[pos + 1 :])


def _merge(xs: tuple, ys: tuple, keep_x: bool, keep_y: bool, keep_both: bool) -> tuple:
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        c = _cmp(xs[i], ys[j])
        if c == 0:
            if keep_both:
                out.append(xs[i])
            i += 1
            j += 1
        elif c < 0:
            if keep_x:
                out.append(xs[i])
            i += 1
        else:
            if keep_y:
                out.append(ys[j])
            j += 1
    if keep_x:
        out.extend(xs[i:])
    if keep_y:
        out.extend(ys[j:])
    return tuple(out)


def union2(a: HfSet, b: HfSet) -> HfSet:
    return HfSet._intern(_merge(a.elements, b.elements, True, True, True))


def intersect2(a: HfSet, b: HfSet) -> HfSet:
    return HfSet._intern(_merge(a.elements, b.elements, False, False, True))


def difference(a: HfSet, b: HfSet) -> HfSet:
    return HfSet._intern(_merge(a.elements, b.elements, True, False, False))


def is_subset(a: HfSet, b: HfSet) -> bool:
    return all(is_member(x, b) for x in a)


def big_union(a: HfSet) -> HfSet:
    out = EMPTY
    for x in a:
        out = union2(out, x)
    return out


def big_intersect(a: HfSet) -> HfSet:
    if not a:
        raise EmptyIntersection("intersection of the empty family is not a set")
    out = a.elements[0]
    for x in a.elements[1:]:
        out = intersect2(out, x)
    return out


DEFAULT_SIZE_LIMIT = 1 << 16


def powerset(a: HfSet, size_limit: int = DEFAULT_SIZE_LIMIT) -> HfSet:
    """All subsets of ``a``, refusing when ``2 ** |a|`` exceeds ``size_limit``.

    Subsets of the sorted element tuple, taken in bitmask order, are already in
    Ackermann order (the highest differing bit decides), so no sort is needed.
    """
    n = len(a)
    if n >= 63 or (1 << n) > size_limit:
        raise ResourceExceeded(f"power set of a {n}-element set exceeds limit {size_limit}")
    return _powerset(a)


@functools.lru_cache(maxsize=64)
def _powerset(a: HfSet) -> HfSet:
    n = len(a)
    elems = a.elements
    subsets = []
    for mask in range(1 << n):
        subsets.append(HfSet._intern(tuple(elems[i] for i in range(n) if mask >> i & 1)))
    return HfSet._intern(tuple(subsets))


# --- pairs and functions -------------------------------------------------


def singleton(a: HfSet) -> HfSet:
    return HfSet._intern((a,))


def pair(a: HfSet, b: HfSet) -> HfSet:
    return make_set((a, b))


def ordered_pair(a: HfSet, b: HfSet) -> HfSet:
    """Kuratowski pair ``{{a}, {a, b}}``."""
    return make_set((singleton(a), pair(a, b)))


def is_ordered_pair(p: HfSet) -> bool:
    if not 1 <= len(p) <= 2:
        return False
    try:
        return ordered_pair(proj1(p), proj2(p)) is p
    except MalformedValue:
        return False


def proj1(p: HfSet) -> HfSet:
    if not p:
        raise MalformedValue(f"not an ordered pair: {p}")
    inner = big_intersect(p)
    if len(inner) != 1:
        raise MalformedValue(f"not an ordered pair: {p}")
    return inner.elements[0]


def proj2(p: HfSet) -> HfSet:
    first = proj1(p)
    rest = diff_singleton(first, big_union(p))
    if not rest:
        return first
    if len(rest) != 1:
        raise MalformedValue(f"not an ordered pair: {p}")
    return rest.elements[0]


def _check_pair(p: HfSet) -> None:
    if not is_ordered_pair(p):
        raise MalformedValue(f"not an ordered pair: {p}")


def is_function(f: HfSet) -> bool:
    seen = set()
    for p in f:
        if not is_ordered_pair(p):
            return False
        key = proj1(p)
        if key in seen:
            return False
        seen.add(key)
    return True


def domain(f: HfSet) -> HfSet:
    if not is_function(f):
        raise MalformedValue(f"not a function: {f}")
    return make_set(proj1(p) for p in f)


def apply(f: HfSet, x: HfSet) -> HfSet:
    if not is_function(f):
        raise MalformedValue(f"not a function: {f}")
    for p in f:
        if proj1(p) is x:
            return proj2(p)
    raise MalformedValue(f"{x} is not in the domain of {f}")


def make_function(mapping: Iterable[tuple[HfSet, HfSet]]) -> HfSet:
    return make_set(ordered_pair(k, v) for k, v in mapping)


def make_sequence(values: Sequence[HfSet]) -> HfSet:
    """The function ``{<#i, values[i]>}`` with ordinal domain ``len(values)``."""
    return make_function((numeral(i), v) for i, v in enumerate(values))


def sequence_values(s: HfSet) -> list[HfSet]:
    """Inverse of :func:`make_sequence`; raises unless ``s`` is an ordinal sequence."""
    if not is_ord_sequence(s):
        raise MalformedValue(f"not a sequence of ordinal length: {s}")
    n = len(s)
    return [apply(s, numeral(i)) for i in range(n)]


# --- ordinals -------------------------------------------------------------


_numerals = [EMPTY]


def numeral(n: int) -> HfSet:
    if n < 0:
        raise ValueError("numerals are non-negative")
    while len(_numerals) <= n:
        # n is the largest member of n+1, so it goes last
        top = _numerals[-1]
        _numerals.append(HfSet._intern(top.elements + (top,)))
    return _numerals[n]


def to_natural(a: HfSet) -> Optional[int]:
    n = len(a)
    return n if numeral(n) is a else None


def successor(a: HfSet) -> HfSet:
    return add_element(a, a)


def is_transitive(a: HfSet) -> bool:
    return all(is_member(y, a) for x in a for y in x)


def is_ordinal(a: HfSet) -> bool:
    """Transitive set of transitive sets (over HF these are the numerals)."""
    return is_transitive(a) and all(is_transitive(x) for x in a)


def is_ord_sequence(a: HfSet) -> bool:
    return is_function(a) and is_ordinal(domain(a))


# --- limits ----------------------------------------------------------------


def liminf_formula(xs: Sequence[HfSet]) -> HfSet:
    """Evaluate ``⋃_{β<α} ⋂_{γ∈[β+1,α)} x_γ`` for a finite sequence of length α.

    The term with ``β + 1 = α`` intersects an empty family and is skipped,
    i.e. β ranges up to ``α - 2``; a one-element sequence yields its element.
    """
    if not xs:
        raise ValueError("liminf of an empty sequence")
    alpha = len(xs)
    if alpha == 1:
        return xs[0]
    out = EMPTY
    for beta in range(alpha - 1):
        out = union2(out, big_intersect(make_set(xs[beta + 1 :])))
    return out


def liminf_cycle(cycle: Sequence[HfSet]) -> HfSet:
    """Characteristic-function liminf of the stream repeating ``cycle`` forever."""
    if not cycle:
        raise ValueError("empty cycle")
    out = cycle[0]
    for x in cycle[1:]:
        out = intersect2(out, x)
    return out


# --- the cumulative hierarchy and the Ackermann enumeration ----------------


def v_stage(n: int, size_limit: int = DEFAULT_SIZE_LIMIT) -> HfSet:
    out = EMPTY
    for _ in range(n):
        out = powerset(out, size_limit)
    return out


@functools.lru_cache(maxsize=4096)
def f_tau(n: int) -> HfSet:
    """The n-th set in Ackermann order (the set whose code is n)."""
    if n < 0:
        raise ValueError("index must be non-negative")
    members = []
    i = 0
    while n >> i:
        if n >> i & 1:
            members.append(f_tau(i))
        i += 1
    return HfSet._intern(tuple(members))


def f_tau_inv(a: HfSet) -> int:
    """Position of ``a`` in the Ackermann enumeration, i.e. its code."""
    return sum(1 << f_tau_inv(x) for x in a)


# --- random generation -----------------------------------------------------


def random_hf(rng: random.Random, max_rank: int, p_stop: float = 0.45) -> HfSet:
    """Seeded random set of rank at most ``max_rank``.

    The member count is geometric (``P(k) = p_stop * (1 - p_stop) ** k``,
    capped at 6) and each member is drawn recursively with ``max_rank - 1``.
    """
    if max_rank <= 0:
        return EMPTY
    k = 0
    while k < 6 and rng.random() > p_stop:
        k += 1
    return make_set(random_hf(rng, max_rank - 1, p_stop) for _ in range(k))


# --- literal syntax ---------------------------------------------------------


def format_hf(a: HfSet, ascii: bool = False) -> str:
    if not a:
        return "{}" if ascii else "∅"
    n = to_natural(a)
    if n is not None:
        return f"#{n}"
    return "{" + ",".join(format_hf(x, ascii) for x in a) + "}"


def parse_hf(text: str) -> HfSet:
    value, pos = parse_hf_at(text, 0)
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise HfParseError("trailing input", pos)
    return value


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def parse_hf_at(text: str, pos: int) -> tuple[HfSet, int]:
    """Parse one literal starting at ``pos``; returns the value and end position."""
    pos = _skip_ws(text, pos)
    if pos >= len(text):
        raise HfParseError("expected a set literal", pos)
    ch = text[pos]
    if ch == "∅":
        return EMPTY, pos + 1
    if ch == "#":
        end = pos + 1
        while end < len(text) and text[end].isdigit():
            end += 1
        if end == pos + 1:
            raise HfParseError("expected digits after '#'", pos)
        return numeral(int(text[pos + 1 : end])), end
    if ch == "<":
        first, pos = parse_hf_at(text, pos + 1)
        pos = _expect(text, pos, ",")
        second, pos = parse_hf_at(text, pos)
        pos = _expect(text, pos, ">")
        return ordered_pair(first, second), pos
    if ch == "{":
        pos = _skip_ws(text, pos + 1)
        members = []
        if pos < len(text) and text[pos] == "}":
            return EMPTY, pos + 1
        while True:
            member, pos = parse_hf_at(text, pos)
            members.append(member)
            pos = _skip_ws(text, pos)
            if pos < len(text) and text[pos] == ",":
                pos += 1
                continue
            pos = _expect(text, pos, "}")
            return make_set(members), pos
    raise HfParseError(f"unexpected character {ch!r}", pos)


def _expect(text: str, pos: int, ch: str) -> int:
    pos = _skip_ws(text, pos)
    if pos >= len(text) or text[pos] != ch:
        raise HfParseError(f"expected {ch!r}", pos)
    return pos + 1
