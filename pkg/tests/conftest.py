from __future__ import annotations

import contextlib
import time

import pytest

from bbroute.code import TABLE_CODES, build_code, build_schedule, registry_spec
from bbroute.layout import search_layout
from bbroute.routing import route_schedule_toric

_RESULTS: dict[int, tuple[str, str, str]] = {}


@pytest.fixture(scope="session")
def codes():
    return {name: build_code(registry_spec(name)) for name in TABLE_CODES}


@pytest.fixture(scope="session")
def layouts(codes):
    return {name: search_layout(code) for name, code in codes.items()}


@pytest.fixture(scope="session")
def schedules(codes):
    return {name: build_schedule(code) for name, code in codes.items()}


@pytest.fixture(scope="session")
def toric_routes(layouts, schedules):
    return {name: route_schedule_toric(layouts[name], schedules[name]) for name in layouts}


@pytest.fixture
def criterion():
    """Context manager that logs one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def run(number: int, title: str):
        notes: list[str] = []
        start = time.perf_counter()
        try:
            yield notes
        except BaseException:
            _log(number, "FAIL", title, notes, start)
            raise
        _log(number, "PASS", title, notes, start)

    return run


def _log(number, status, title, notes, start):
    detail = "; ".join(notes)
    elapsed = time.perf_counter() - start
    _RESULTS[number] = (status, title, f"{detail} [{elapsed:.1f}s]" if detail else f"[{elapsed:.1f}s]")
    print(f"criterion {number:2d} {status}: {title} {_RESULTS[number][2]}")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, detail = _RESULTS[number]
        terminalreporter.write_line(f"{status} {number:2d} {title}: {detail}")
