import numpy as np
import pytest

from blendloop.csvio import fixture_path, read_series_csv


@pytest.fixture(scope="session")
def table1() -> np.ndarray:
    return read_series_csv(fixture_path("table1"))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture()
def acceptance_log():
    def log(line: str) -> None:
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
