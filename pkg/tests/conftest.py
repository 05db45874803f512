import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        parts = [f"{k}={v}" for k, v in item.user_properties]
        crash = getattr(report.longrepr, "reprcrash", None)
        if report.failed and crash is not None:
            parts.append(crash.message.splitlines()[0])
        detail = "; ".join(parts)
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _results[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        status, title, detail = _results[number]
        tr.write_line(f"criterion {number:>2}: {status}  {title}" + (f"  [{detail}]" if detail else ""))
