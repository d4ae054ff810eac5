import pytest

from roommates.instance import ExplicitPreferences

INSTANCE_A = [[2, 3, 4], [1, 3, 4], [1, 2, 4], [1, 2, 3]]
INSTANCE_B = [[2, 3, 4], [3, 1, 4], [1, 2, 4], [1, 2, 3]]


def instance_text(lists):
    return f"{len(lists)}\n" + "".join(" ".join(map(str, row)) + "\n" for row in lists)


@pytest.fixture
def instance_a():
    return ExplicitPreferences.from_lists(INSTANCE_A)


@pytest.fixture
def instance_b():
    return ExplicitPreferences.from_lists(INSTANCE_B)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_report():
    return _ACCEPTANCE.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
