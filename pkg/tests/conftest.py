import random

import pytest

from dccse import core


@pytest.fixture
def toy():
    return core.setup("toy")


@pytest.fixture(scope="session")
def prod():
    return core.setup("production")


@pytest.fixture
def rng():
    return random.Random(20240607)


class ScriptedRng:
    """Replays fixed values from randrange, for forcing resampling paths."""

    def __init__(self, values):
        self.values = list(values)

    def randrange(self, *args):
        return self.values.pop(0)


@pytest.fixture
def scripted():
    return ScriptedRng


def pytest_configure(config):
    config._acceptance = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion, then assert it."""
    def record(label, passed, detail=""):
        request.config._acceptance.append((label, bool(passed), detail))
        assert passed, "%s: %s" % (label, detail)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = getattr(config, "_acceptance", [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in rows:
        terminalreporter.write_line("%s %s  %s" % ("PASS" if passed else "FAIL", label, detail))
