import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion checked by the test")


@pytest.fixture
def report(request):
    """Attach a one-line summary to the running acceptance test."""
    def _report(text):
        request.node.user_properties.append(("detail", text))
    return _report


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if rep.skipped:
            status = "SKIP"
        elif rep.passed:
            status = "PASS"
        else:
            status = "FAIL"
        details = [v for k, v in item.user_properties if k == "detail"]
        _RESULTS[name] = (status, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in _RESULTS.items():
        line = f"{status:4s}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
