"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line; ``conftest.py`` prints them in the terminal
summary, and running this file directly prints them to stdout.
"""

from functools import cache

import pytest

from clark_rif.report import dumps
from clark_rif.selftest import CRITERIA, RUNTIME_LIMITS, SelftestConfig, run_criterion, run_selftest

SEED = 0
LINES: dict[int, str] = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    LINES[number] = f"{status} criterion {number}: {title}" + (f" ({detail})" if detail else "")


@cache
def result(number: int) -> dict:
    return run_criterion(number, SelftestConfig(seed=SEED))


def failed_checks(res: dict) -> list[str]:
    return [c["name"] for c in res["checks"] if not c["pass"]]


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = result(number)
    limit = RUNTIME_LIMITS.get(number)
    in_time = limit is None or res["wall_time"] <= limit
    detail = f"{len(res['checks'])} checks, {res['wall_time']:.1f} s"
    if limit is not None:
        detail += f" of {limit:.0f} s"
    bad = failed_checks(res)
    if bad:
        detail += "; failed: " + ", ".join(bad)
    record(number, res["title"], res["pass"] and in_time, detail)
    assert not bad, bad
    assert in_time, f"took {res['wall_time']:.1f} s, limit {limit} s"


def test_criterion_8_determinism():
    cfg = SelftestConfig(seed=SEED, timing=False)
    first = dumps(run_selftest(cfg))
    second = dumps(run_selftest(cfg))
    same = first == second
    record(8, "byte-identical selftest reports", same, f"{len(first)} bytes")
    assert same


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        try:
            test_criterion(n)
        except AssertionError:
            pass
        print(LINES[n])
    try:
        test_criterion_8_determinism()
    except AssertionError:
        pass
    print(LINES[8])
