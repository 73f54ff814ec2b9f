from pathlib import Path

import pytest

from tccp.syntax import parse_program, parse_spec

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture
def timeout_buggy():
    program = parse_program(load("timeout_buggy.tccp"))
    return program, parse_spec(load("timeout.spec"), program)


@pytest.fixture
def timeout_fixed():
    program = parse_program(load("timeout_fixed.tccp"))
    return program, parse_spec(load("timeout.spec"), program)


@pytest.fixture
def counter():
    program = parse_program(load("counter.tccp"))
    return program, parse_spec(load("counter.spec"), program)


@pytest.fixture
def control():
    program = parse_program(load("control.tccp"))
    return program, parse_spec(load("control.spec"), program)


@pytest.fixture
def control_buggy():
    program = parse_program(load("control_buggy.tccp"))
    return program, parse_spec(load("control.spec"), program)
