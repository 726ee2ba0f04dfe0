import pytest

_RESULTS: dict[int, str] = {}


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.done = False

    def report(self, ok: bool, detail: str) -> bool:
        status = "PASS" if ok else "FAIL"
        _RESULTS[self.number] = f"{status} criterion {self.number} ({self.title}): {detail}"
        self.done = True
        return ok


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    crit = _Criterion(*marker.args)
    yield crit
    if not crit.done:
        _RESULTS[crit.number] = f"FAIL criterion {crit.number} ({crit.title}): raised before reporting"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        terminalreporter.write_line(_RESULTS[number])
