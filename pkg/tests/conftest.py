import json
from pathlib import Path

import pytest

from qmqo.problem import example_problem
from qmqo.qubo import encode

DATA = Path(__file__).parent / "data"
EXAMPLE2_JSON = '{"queries": [[3,13],[21,1]], "savings": [{"i":1,"j":2,"value":14}], "epsilon": 1}'

_criteria: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def example2():
    return example_problem()


@pytest.fixture
def example2_qubo(example2):
    return encode(example2)


@pytest.fixture
def example2_file(tmp_path):
    path = tmp_path / "example2.json"
    path.write_text(EXAMPLE2_JSON)
    return path


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the end-of-run summary."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        _criteria[name] = (passed, detail)
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda k: int(k.split()[0]) if k.split()[0].isdigit() else 99):
        passed, detail = _criteria[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
