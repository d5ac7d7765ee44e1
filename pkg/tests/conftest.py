import numpy as np
import pytest

from fracp import assemble_operator, build_grid, make_params

ACCEPTANCE_LINES = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def torsion_64():
    """Small (s, p) = (0.5, 2) operator with f = 1 solved tightly."""
    from fracp import solve_fixed_rhs

    grid = build_grid(0.0, 1.0, 64, 1.0)
    op = assemble_operator(grid, 0.5, 2.0)
    res = solve_fixed_rhs(op, np.ones(64), tol=1e-11)
    return grid, op, res


@pytest.fixture(scope="session")
def singular_preset():
    return make_params(0.5, 2.0, 1.0, 0.5)
