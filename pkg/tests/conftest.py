import json
import os
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from parapolar.analysis import verify_parapolar
from parapolar.constructions import build

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

HERE = os.path.dirname(__file__)


@pytest.fixture(scope="session")
def counts():
    with open(os.path.join(HERE, "fixtures", "counts.json")) as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def geometry(spec: str):
    return build(spec)


@lru_cache(maxsize=None)
def report(spec: str):
    return verify_parapolar(geometry(spec))


@pytest.fixture(scope="session")
def built():
    return geometry


@pytest.fixture(scope="session")
def analysed():
    return report


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
