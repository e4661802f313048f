import pytest

from extracd import kernels

# populated by test_acceptance, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jit kernels once so tests measure steady-state time."""
    kernels.warmup()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
