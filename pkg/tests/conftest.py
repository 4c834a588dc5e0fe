import functools

import pytest

from incidence_forge.construction import PAPER_PROFILE, REDUCED_PROFILE, ConstructionParams, enumerate_lines

PROFILES = {"reduced": REDUCED_PROFILE, "paper": PAPER_PROFILE}


@functools.lru_cache(maxsize=None)
def built(k, p=1, q=1, profile="reduced"):
    """(params, lines) for one construction, cached across the session."""
    params = ConstructionParams(k, p, q, PROFILES[profile])
    return params, enumerate_lines(params)


# acceptance results, printed once at the end of the run
ACCEPTANCE = {}


def record_criterion(num, ok, detail=""):
    ACCEPTANCE[num] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def build():
    return built
