from __future__ import annotations

from collections import OrderedDict

import pytest

_CRITERIA: "OrderedDict[int, list]" = OrderedDict()


@pytest.fixture
def criterion():
    """``criterion(k, part, ok, detail)`` records one part of acceptance criterion ``k``."""

    def record(k: int, part: str, ok: bool, detail: str) -> bool:
        _CRITERIA.setdefault(k, []).append((part, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        parts = _CRITERIA[k]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name} {'PASS' if good else 'FAIL'}: {d}" for name, good, d in parts)
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
