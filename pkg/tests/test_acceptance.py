"""Acceptance criteria AC1-AC9 at their stated tolerances.

Each criterion prints one PASS/FAIL line (collected into the pytest terminal
summary by ``conftest.py``). Running this file directly prints the same lines
together with every individual check.
"""
import sys
import time

import pytest

from mzteleport.verify import CRITERIA

RESULTS: dict[str, str] = {}


def evaluate(key: str) -> tuple[bool, str, list]:
    t0 = time.perf_counter()
    checks = CRITERIA[key]()
    dt = time.perf_counter() - t0
    failed = [c for c in checks if not c.passed]
    status = "PASS" if not failed else "FAIL"
    summary = f"{key} {status}: {len(checks) - len(failed)}/{len(checks)} checks passed ({dt:.1f} s)"
    if failed:
        worst = max(failed, key=lambda c: c.measured / c.tolerance)
        summary += f"; worst: {worst.name} measured {worst.measured:.2e} vs tolerance {worst.tolerance:.0e}"
    return not failed, summary, checks


@pytest.mark.parametrize("key", list(CRITERIA))
def test_criterion(key):
    ok, summary, checks = evaluate(key)
    RESULTS[key] = summary
    print(summary)
    for c in checks:
        print("   ", c.line())
    assert ok, summary + "\n" + "\n".join(c.line() for c in checks if not c.passed)


if __name__ == "__main__":
    all_ok = True
    for key in CRITERIA:
        ok, summary, checks = evaluate(key)
        all_ok &= ok
        print(summary)
        for c in checks:
            print("   ", c.line())
    sys.exit(0 if all_ok else 1)
