from functools import lru_cache

import pytest

from topodecode.codes import build_code
from topodecode.diagnosis import build_scheme

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def code_for(family, d):
    return build_code(family, d)


@lru_cache(maxsize=None)
def scheme_for(family, d, kind):
    return build_scheme(code_for(family, d), kind)


@pytest.fixture
def report():
    """report(k, ok, detail) records one acceptance line, then asserts."""
    def _report(k, ok, detail=""):
        ACCEPTANCE[k] = (bool(ok), detail)
        assert ok, f"criterion {k}: {detail}"
    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
