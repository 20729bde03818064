import os
import time
from contextlib import contextmanager

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Time a block, record one PASS/FAIL line for it, re-raise failures."""

    @contextmanager
    def run(number: int, title: str, limit_s: float | None = None):
        t0 = time.perf_counter()
        status, detail = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - t0
            if limit_s is not None and elapsed >= limit_s:
                detail = f" (runtime {elapsed:.2f}s >= {limit_s:g}s)"
                raise AssertionError(f"criterion {number} took {elapsed:.2f}s, limit {limit_s:g}s")
            status = "PASS"
        except BaseException as exc:
            detail = detail or f" ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
            raise
        finally:
            elapsed = time.perf_counter() - t0
            line = f"criterion {number:2d}: {status}  {title}  [{elapsed:.2f}s]{detail}"
            _ACCEPTANCE[number] = line
            print(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
