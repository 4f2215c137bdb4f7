from pathlib import Path

import pytest

from cogrelay.scenario import db_to_linear, reference_scenario

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def grid_scenarios():
    """The 45-point validation grid: N x P_PT (dB) x lambda_p."""
    return [
        reference_scenario(n_relays=n, p_pt=db_to_linear(p_db), lambda_p=lam)
        for n in (1, 2, 3)
        for p_db in (5, 10, 15, 20, 25)
        for lam in (0.05, 0.1, 0.2)
    ]


@pytest.fixture
def ref():
    return reference_scenario()


@pytest.fixture
def configs_dir():
    return CONFIGS


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
