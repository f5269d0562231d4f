"""Shared fixtures and the acceptance-criteria summary hook."""

import pytest

from noesc import cli

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def s4_log():
    """Full benchmark run (stable internal dynamics, analytic gradients)."""
    cfg = cli.load_config(None, "s4-default", [])
    return cli.run_experiment(cfg)


@pytest.fixture(scope="session")
def s4_log_unstable():
    """Full benchmark run with unstable internal dynamics (rho = -1)."""
    cfg = cli.load_config(None, "s4-default", ["plant.rho=-1"])
    return cli.run_experiment(cfg)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE):
        name = nodeid.split("::")[-1]
        verdict = "PASS" if _ACCEPTANCE[nodeid] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict} {name}")
