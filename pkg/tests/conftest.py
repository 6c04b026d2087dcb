"""Shared test setup and the per-criterion acceptance summary."""
import pytest

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "failed": []})
    if report.failed or (report.when == "call" and report.skipped):
        entry["ok"] = False
        entry["failed"].append(report.nodeid.split("::")[-1])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] and not e["failed"] else "FAIL"
        line = f"criterion {number}: {status}  {e['title']}"
        if e["failed"]:
            line += f"  (failed: {', '.join(sorted(set(e['failed'])))})"
        tr.write_line(line)
