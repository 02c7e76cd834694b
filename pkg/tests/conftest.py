"""Per-criterion pass/fail summary for the acceptance suite."""

from collections import OrderedDict

import pytest

_criteria: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, description): acceptance criterion checked by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        number, description = mark.args
        item.user_properties.append(("criterion", number))
        entry = _criteria.setdefault(number, {"description": description, "failed": False, "ran": False,
                                              "details": []})
        item.stash[_key] = entry


_key = pytest.StashKey[dict]()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    entry = item.stash.get(_key, None)
    if entry is None:
        return
    if report.when == "call" or report.failed:
        entry["ran"] = True
        if report.failed:
            entry["failed"] = True
    detail = getattr(item, "criterion_detail", None)
    if report.when == "teardown" and detail:
        entry["details"].append(detail)


@pytest.fixture
def record_detail(request):
    """Attach a short measurement summary to the criterion line."""

    def record(text: str) -> None:
        request.node.criterion_detail = text

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        if not entry["ran"]:
            verdict = "NOT RUN"
        else:
            verdict = "FAIL" if entry["failed"] else "PASS"
        detail = "; ".join(entry["details"])
        line = f"CRITERION {number} {verdict}: {entry['description']}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
