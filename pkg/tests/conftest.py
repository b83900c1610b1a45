"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_OUTCOMES: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.fixture
def measured(request):
    """Append human-readable measurements to the criterion summary line."""
    marker = request.node.get_closest_marker("criterion")
    notes = _OUTCOMES.setdefault(marker.args[0], {"title": marker.args[1], "ok": True, "notes": []})["notes"]
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    entry = _OUTCOMES.setdefault(marker.args[0], {"title": marker.args[1], "ok": True, "notes": []})
    if rep.when == "call" and (rep.failed or hasattr(rep, "wasxfail")):
        entry["ok"] = False
    elif rep.when == "setup" and (rep.failed or rep.skipped):
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        entry = _OUTCOMES[number]
        status = "PASS" if entry["ok"] else "FAIL"
        detail = "; ".join(entry["notes"])
        terminalreporter.write_line(f"{status} criterion {number:2d}: {entry['title']}" + (f" [{detail}]" if detail else ""))
