"""Collects one result line per acceptance criterion for the terminal summary."""

import time
from contextlib import contextmanager

LINES = []


@contextmanager
def criterion(number, title, limit=None):
    """Time a criterion body and record PASS/FAIL; re-raises the failure."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        _record(number, title, False, elapsed, limit, f"{type(exc).__name__}: {exc}".splitlines()[0])
        raise
    elapsed = time.perf_counter() - start
    ok = limit is None or elapsed < limit
    _record(number, title, ok, elapsed, limit, "" if ok else "over time limit")
    assert ok, f"criterion {number} took {elapsed:.3f}s, limit {limit}s"


def _record(number, title, ok, elapsed, limit, note):
    budget = f" (limit {_seconds(limit)})" if limit is not None else ""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} [{_seconds(elapsed)}{budget}]"
    if note:
        line += f" {note}"
    LINES.append(line)
    print(line)


def _seconds(t):
    return f"{t * 1e3:.3f}ms" if t < 1 else f"{t:.2f}s"
