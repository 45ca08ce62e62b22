import functools
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from quasidisk import fixtures  # noqa: E402
from quasidisk.space import path_metric  # noqa: E402


@functools.lru_cache(maxsize=None)
def cached_fixture(kind, n, **params):
    return fixtures.generate(fixtures.FixtureSpec(kind, n=n, params=dict(params)))


@functools.lru_cache(maxsize=None)
def cached_pm(kind, n):
    return path_metric(cached_fixture(kind, n))


@pytest.fixture(scope="session")
def disk():
    return cached_fixture("flat-disk", 3000)


@pytest.fixture(scope="session")
def disk_pm(disk):
    return cached_pm("flat-disk", 3000)


ACCEPTANCE: dict = {}


def record(key: str, ok: bool, detail: str) -> bool:
    """Store one acceptance line; the terminal summary prints them in order."""
    ACCEPTANCE[key] = f"{key} {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[key])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
            terminalreporter.write_line(ACCEPTANCE[key])
