import warnings

import pytest

from predistill import photonic
from predistill.su2core import H_TARGET, T_TARGET
from predistill.xycomposite import (
    SEVEN_PULSE_SEEDS,
    single_pulse,
    solve_five_pulse,
    solve_seven_pulse,
    solve_three_pulse,
)

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _quiet_extrapolation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", photonic.ExtrapolationWarning)
        yield


@pytest.fixture(scope="session")
def t_sequences():
    return {
        1: single_pulse(T_TARGET),
        3: solve_three_pulse(T_TARGET)[0],
        5: solve_five_pulse(T_TARGET)[0],
        7: solve_seven_pulse(T_TARGET, SEVEN_PULSE_SEEDS["T"]),
    }


@pytest.fixture(scope="session")
def h_sequences():
    return {
        3: solve_three_pulse(H_TARGET)[0],
        5: solve_five_pulse(H_TARGET)[0],
        7: solve_seven_pulse(H_TARGET, SEVEN_PULSE_SEEDS["H"]),
    }


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
