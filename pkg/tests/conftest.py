import pytest

from groupform import CoverageKind, GForm, Instance, NoPenalty, Ratio, UtilitySpec

LINE3_LOCS = ((0.0,), (0.6,), (1.2,))
LINE3_RES = (2.0, 1.0, 2.0)

# nodeid suffix -> criterion label, filled by test_acceptance via the marker
_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_collection_finish(session):
    for item in session.items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _ACCEPTANCE[item.nodeid] = (mark.args[0], "NOT RUN")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.nodeid not in _ACCEPTANCE:
        return
    label, status = _ACCEPTANCE[item.nodeid]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _ACCEPTANCE[item.nodeid] = (label, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    by_label: dict[str, list[str]] = {}
    for label, status in _ACCEPTANCE.values():
        by_label.setdefault(label, []).append(status)
    terminalreporter.section("acceptance criteria")
    for label in sorted(by_label, key=lambda s: int(s.split()[0])):
        statuses = by_label[label]
        for status in ("FAIL", "NOT RUN", "SKIP", "PASS"):
            if status in statuses:
                break
        terminalreporter.write_line(f"[{status}] criterion {label} ({len(statuses)} test(s))")


@pytest.fixture
def line3():
    return Instance(LINE3_LOCS, LINE3_RES)


@pytest.fixture
def linear_diameter():
    return UtilitySpec(CoverageKind.DIAMETER, Ratio(GForm.LINEAR), NoPenalty())
