"""Pass/fail bookkeeping for the acceptance criteria, printed at the end of the run."""

import contextlib
import time

RESULTS: dict = {}


@contextlib.contextmanager
def criterion(n: int, title: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        detail = f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        RESULTS[n] = (False, title, time.perf_counter() - start, detail[:120])
        raise
    RESULTS[n] = (True, title, time.perf_counter() - start, "")


def lines() -> list:
    out = []
    for n in sorted(RESULTS):
        ok, title, secs, detail = RESULTS[n]
        tail = f" ({detail})" if detail else ""
        out.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  [{secs:.2f}s]{tail}")
    return out
