import pytest

from helpers import chain_instance, contention_instance, parallel_instance


@pytest.fixture
def chain():
    return chain_instance()


@pytest.fixture
def parallel():
    return parallel_instance()


@pytest.fixture
def contention():
    return contention_instance()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = {}
    for status in ("passed", "failed", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid or getattr(report, "when", "call") != "call":
                continue
            name = nodeid.split("::")[-1]
            lines[name] = status.upper()
    # skips surface from setup, not call
    for report in terminalreporter.stats.get("skipped", []):
        nodeid = getattr(report, "nodeid", "")
        if "test_acceptance" in nodeid:
            name = nodeid.split("::")[-1]
            lines.setdefault(name, "SKIPPED")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(f"ACCEPTANCE {name}: {lines[name]}")
