import numpy as np
import pytest

from xychain import ModelParams, build_table

# one pass/fail line per acceptance criterion, printed after the run
_ACCEPTANCE_RESULTS: dict[str, str] = {}


def record_criterion(name: str, passed: bool):
    _ACCEPTANCE_RESULTS[name] = "PASS" if passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{_ACCEPTANCE_RESULTS[name]}  {name}")


@pytest.fixture(scope="session")
def critical_table():
    """Thermodynamic-limit contraction table at the critical point."""
    return build_table(ModelParams(1.0, 1.0, None), -11, 11)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


NEGATIVITY_GRID = (0.6, 0.8, 1.0, 1.2, 1.4)


@pytest.fixture(scope="session")
def negativity_curves():
    """Thermodynamic-limit negativity on a coarse grid, per arrangement."""
    from xychain import Arrangement, build_rdm
    from xychain.gmn import genuine_negativity

    curves = {}
    for spacings in ((1, 1), (1, 2), (1, 1, 1), (1, 1, 2), (1, 2, 1)):
        curves[spacings] = [
            genuine_negativity(
                build_rdm(ModelParams(lam, 1.0, None), Arrangement(spacings))
            ).value
            for lam in NEGATIVITY_GRID
        ]
    return curves
