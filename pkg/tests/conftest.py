"""Shared pytest plumbing: the acceptance-criterion summary table.

Acceptance tests call the record_criterion fixture with the measured
evidence for one criterion before asserting on it; the terminal summary
then prints one PASS/FAIL line per criterion, including criteria whose
test never got to the recording point (those show up as "not
evaluated"). Helpers are exposed as fixtures, not imports, because
module name "conftest" is ambiguous once other test trees are collected
in the same run.
"""

import pytest

_RECORDED = []
_ACCEPTANCE_RAN = False

PRIMARY_CRITERIA = (
    "element-sweep-architecture-gain",
    "antenna-sweep-monotonicity",
    "convergence-improvement",
    "tiny-oracle-quality-gate",
    "gradient-correctness",
    "final-solution-feasibility",
    "rate-model-equivalence",
    "channel-statistics",
    "inner-iteration-time-scaling",
)


def _record_criterion(name, ok, detail=""):
    """Log one criterion verdict for the summary table; returns ok."""
    _RECORDED.append((name, bool(ok), detail))
    return bool(ok)


@pytest.fixture(scope="session")
def record_criterion():
    """The criterion recorder: call as record_criterion(name, ok, detail)."""
    return _record_criterion


@pytest.fixture(scope="session")
def mark_acceptance_ran():
    """Requesting this flags the run so missed criteria print as FAIL."""
    global _ACCEPTANCE_RAN
    _ACCEPTANCE_RAN = True


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not (_RECORDED or _ACCEPTANCE_RAN):
        return
    seen = {name for name, _, _ in _RECORDED}
    lines = []
    for name, ok, detail in _RECORDED:
        verdict = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        lines.append(f"[PRIMARY] {name}: {verdict}{suffix}")
    for name in PRIMARY_CRITERIA:
        if name not in seen:
            lines.append(f"[PRIMARY] {name}: FAIL (not evaluated)")
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
