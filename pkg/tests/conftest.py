import pytest

from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_LINES = {}


@pytest.fixture
def report():
    """Record the verdict line of an acceptance criterion."""

    def record(key, passed, detail):
        _LINES[key] = f"{key}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_LINES, key=lambda k: int(k.split()[-1])):
        terminalreporter.write_line(_LINES[key])
