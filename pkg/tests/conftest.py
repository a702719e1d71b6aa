import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

_ACCEPTANCE: list[tuple[int, bool, str, float]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, ok, detail, seconds)``."""

    def record(number, ok, detail, seconds=0.0):
        _ACCEPTANCE.append((number, bool(ok), detail, seconds))
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} [{seconds:.2f}s]")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail, seconds in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} [{seconds:.2f}s]")
