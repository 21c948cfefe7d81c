"""Shared fixtures, a slow literal verifier and the acceptance summary hook."""

from __future__ import annotations

import re

import numpy as np
import pytest

from mapdakit.assembly import construct_theorem1, construct_theorem4, construct_theorem5
from mapdakit.errors import ConstraintError
from mapdakit.mapda import Mapda
from mapdakit.placement import SystemParams

EXAMPLE_GRID = [
    ["*", "*", 1, 1],
    ["*", 2, "*", 2],
    [2, "*", 2, "*"],
    [1, 1, "*", "*"],
]
EXAMPLE_H = np.array([[1.0, 1.0], [2.0, 1.0], [4.0, 1.0], [8.0, 1.0]])


@pytest.fixture
def example_array() -> Mapda:
    return Mapda.from_grid(EXAMPLE_GRID, antennas=2)


@pytest.fixture(scope="session")
def small_a() -> Mapda:
    return construct_theorem1(SystemParams(5, 3, 1, 2, 1), "dp")


def naive_is_mapda(grid: np.ndarray, L: int, S: int) -> bool:
    """Cell-by-cell reading of the four conditions, no vectorization."""
    F, K = grid.shape
    stars = [sum(1 for f in range(F) if grid[f][k] == 0) for k in range(K)]
    if len(set(stars)) > 1:
        return False
    seen = {int(v) for row in grid for v in row if v != 0}
    if seen != set(range(1, S + 1)):
        return False
    for s in range(1, S + 1):
        cells = [(f, k) for f in range(F) for k in range(K) if grid[f][k] == s]
        cols = [k for _, k in cells]
        if len(cols) != len(set(cols)):
            return False
        for f, _ in cells:
            if sum(1 for k in set(cols) if grid[f][k] != 0) > L:
                return False
    return True


def constructions(p: SystemParams):
    """(name, thunk) for every constructor applicable to p."""
    yield "dp", lambda: construct_theorem1(p, "dp")
    yield "greedy", lambda: construct_theorem1(p, "greedy")
    yield "thm3", lambda: construct_theorem1(p, "thm3")
    yield "thm4", lambda: construct_theorem4(p)
    if p.b == 0:
        for lp in range(p.t + p.r, p.lam + 1):
            yield f"thm5:{lp}", (lambda lp=lp: construct_theorem5(p, lp))


def built(p: SystemParams):
    """Arrays from every constructor whose preconditions hold."""
    for name, make in constructions(p):
        try:
            yield name, make()
        except ConstraintError:
            continue


# ------------------------------------------------------------ summary lines

_OUTCOMES: dict[int, str] = {}
_CRIT = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_runtest_logreport(report):
    m = _CRIT.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if report.outcome != "passed" or n not in _OUTCOMES:
            _OUTCOMES[n] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        terminalreporter.write_line(f"criterion {n}: {_OUTCOMES[n]}")
