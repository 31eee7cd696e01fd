"""Reference implementations used by the tests.

Everything here works on Python frozensets and integers and shares no code
with the package, so agreement between the two is meaningful.
"""

from __future__ import annotations

import itertools

from srm import hfset as hf


def to_frozen(a: hf.HfSet) -> frozenset:
    return frozenset(to_frozen(x) for x in a)


def from_frozen(fs: frozenset) -> hf.HfSet:
    return hf.make_set(from_frozen(x) for x in fs)


def ack_code(fs: frozenset) -> int:
    """Ackermann code: the sum of 2**code(z) over the members z."""
    return sum(2 ** ack_code(z) for z in fs)


def from_code(n: int) -> frozenset:
    return frozenset(from_code(i) for i in range(n.bit_length()) if n >> i & 1)


def rank(fs: frozenset) -> int:
    return 1 + max(map(rank, fs)) if fs else 0


def numeral(n: int) -> frozenset:
    out = frozenset()
    for _ in range(n):
        out = out | {out}
    return out


def powerset(fs: frozenset) -> frozenset:
    items = list(fs)
    return frozenset(
        frozenset(c) for k in range(len(items) + 1) for c in itertools.combinations(items, k)
    )


def v_stage(n: int) -> frozenset:
    out = frozenset()
    for _ in range(n):
        out = powerset(out)
    return out


def kpair(a: frozenset, b: frozenset) -> frozenset:
    return frozenset({frozenset({a}), frozenset({a, b})})


def is_transitive(fs: frozenset) -> bool:
    return all(y <= fs for y in fs)


def is_ordinal(fs: frozenset) -> bool:
    return is_transitive(fs) and all(is_transitive(y) for y in fs)


def char_liminf(stream: list, horizon_start: int) -> frozenset:
    """Characteristic-function liminf of ``stream`` judged on the window after ``horizon_start``.

    A candidate is in the result when, from some position at or before
    ``horizon_start``, it belongs to every later value in the window.
    """
    candidates = frozenset().union(*stream)
    out = set()
    for x in candidates:
        if any(all(x in v for v in stream[n:]) for n in range(horizon_start + 1)):
            out.add(x)
    return frozenset(out)


def every_path_meets(successors: dict, s: str, target: set, depth: int) -> bool:
    """Brute-force bar check on the tree unrolled to ``depth``."""
    if s in target:
        return True
    if depth == 0:
        return False
    return all(every_path_meets(successors, t, target, depth - 1) for t in successors[s])
