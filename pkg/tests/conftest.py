import numpy as np
import pytest

from expfact.linalg import SIGMA_X, SIGMA_Z, expm
from expfact.operators import Grid, GridSeries, su2_bellman_operator
from expfact.wilcox import wilcox_generators

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def su2_exact_interaction(a: float, lam: float) -> np.ndarray:
    """Exact V(1) for dV/dt = lam * i(cos 2at sx + sin 2at sy) V."""
    return expm(-1j * a * SIGMA_Z) @ expm(1j * (a * SIGMA_Z + lam * SIGMA_X))


def fitted_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@pytest.fixture(scope="session")
def su2_fine():
    """W_1..W_7 for the SU(2) Bellman operator, a = 1, on [0, 1] with 10^5 nodes."""
    grid = Grid(0.0, 1.0, 100_001)
    ws, wdots = wilcox_generators(su2_bellman_operator(1.0), grid, 7)
    return grid, [GridSeries(grid, w) for w in ws]
