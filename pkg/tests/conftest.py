import os
from pathlib import Path

import pytest

_VERDICTS: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--data", default=None, metavar="DIR",
                     help="directory with authorship.csv and citations.csv for the "
                          "real-data p-value check (or set NETFIBER_DATA)")


@pytest.fixture
def dataset(request):
    path = request.config.getoption("--data") or os.environ.get("NETFIBER_DATA")
    if not path:
        pytest.skip("no dataset supplied (--data DIR or NETFIBER_DATA)")
    return Path(path)


class Verdict:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title

    def check(self, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {self.number}: {self.title} [{detail}]"
        _VERDICTS.append(line)
        print(line)
        assert ok, line


@pytest.fixture
def criterion():
    return Verdict


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
