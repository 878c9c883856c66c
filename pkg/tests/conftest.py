import pytest

from radialopt.problem import load_problem


@pytest.fixture(scope="session")
def ex1():
    return load_problem("ex1")


@pytest.fixture(scope="session")
def ex2():
    return load_problem("ex2")


ACCEPTANCE_LINES: list = []


def record_acceptance(number: int, passed: bool, summary: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {summary}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
