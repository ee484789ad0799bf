import pytest

_CRITERIA: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def record():
    """Collect named checks for an acceptance criterion; returns their conjunction."""

    def _record(criterion: int, checks: list[tuple[str, bool, str]]) -> bool:
        _CRITERIA.setdefault(criterion, []).extend(checks)
        return all(ok for _, ok, _ in checks)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for k in sorted(_CRITERIA):
        checks = _CRITERIA[k]
        ok = all(c[1] for c in checks)
        tr.write_line(f"CRITERION {k}: {'PASS' if ok else 'FAIL'}")
        for name, passed, detail in checks:
            tr.write_line(f"    [{'ok' if passed else 'XX'}] {name}: {detail}")
