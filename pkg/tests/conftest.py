"""Shared fixtures and the acceptance-criteria report.

Acceptance tests register one line each through the `record_criterion`
fixture; the terminal summary prints them after the run so the pass/fail
status of every criterion is visible in one block.
"""

import numpy as np
import pytest

from ionchain import equilibrium, modes, resonances

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((number, title, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} [{status}] {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def chains():
    """Equilibrium positions keyed by ion count, shared across tests."""
    return {n: equilibrium.solve_equilibrium(n) for n in range(1, 11)}


@pytest.fixture(scope="session")
def axial_eigenvalues(chains):
    return {n: np.linalg.eigvalsh(modes.axial_matrix(chains[n]))
            for n in range(1, 11)}


@pytest.fixture(scope="session")
def catalogs(chains):
    """Resonance catalogs for every chain length the tables cover."""
    return {n: resonances.build_catalog(n) for n in range(2, 11)}
