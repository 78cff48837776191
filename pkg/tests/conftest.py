import numpy as np
import pytest

from ecgkit.signal_model import EcgSignal

# acceptance outcomes collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def ten_second_ramp():
    return EcgSignal(np.arange(1000) / 1000.0, 100.0, "ramp", "ECG1")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
