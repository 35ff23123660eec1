"""Shared plotting-test helpers and the secondary criterion scorecard.

The figure-fidelity criterion reports one PASS/FAIL line in the
terminal summary, mirroring how the simulator's acceptance suite
reports its criteria. Tests record through the ``record_secondary``
fixture so nothing here needs to be imported by name.
"""

from __future__ import annotations

import pytest

SECONDARY_CRITERIA = ("plot-fidelity",)

_RECORDED = {}
_RAN = False


@pytest.fixture
def record_secondary():
    """Record a named secondary criterion outcome; returns ``ok``."""

    def _record(name, ok, detail=""):
        _RECORDED[name] = (ok if ok is None else bool(ok), detail)
        return ok

    return _record


@pytest.fixture
def mark_secondary_ran():
    """Flag that criterion tests were collected, so misses print as FAIL."""
    global _RAN
    _RAN = True


def pytest_terminal_summary(terminalreporter):
    if not (_RECORDED or _RAN):
        return
    terminalreporter.section("secondary criteria")
    for name in SECONDARY_CRITERIA:
        if name in _RECORDED:
            ok, detail = _RECORDED[name]
            verdict = "SKIPPED" if ok is None else ("PASS" if ok else "FAIL")
            suffix = f" ({detail})" if detail else ""
        else:
            verdict, suffix = "FAIL", " (not evaluated)"
        terminalreporter.write_line(f"[SECONDARY] {name}: {verdict}{suffix}")
