from __future__ import annotations

from functools import lru_cache

import pytest

from conicrank import build_geometry, field_for_order

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def geometry(q: int):
    return build_geometry(field_for_order(q))


@pytest.fixture(params=[3, 5, 7, 9, 11, 13])
def small_geom(request):
    return geometry(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
