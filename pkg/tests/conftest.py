"""Shared fixtures: memoized expensive solves so the slab and acceptance
suites reuse one solution per parameter point.
"""

import numpy as np
import pytest

from kswave import Params, RunConfig, SlabConfig, run, solve_slab
from kswave.core import grid_make

_SLAB_CACHE = {}
_RUN_CACHE = {}


@pytest.fixture(scope="session")
def slab_solve():
    """Factory returning (config, solution) for (chi, d), memoized."""

    def factory(chi, d, **overrides):
        key = (chi, d, tuple(sorted(overrides.items())))
        if key not in _SLAB_CACHE:
            config = SlabConfig(Params(chi, d), **overrides)
            _SLAB_CACHE[key] = (config, solve_slab(config))
        return _SLAB_CACHE[key]

    return factory


@pytest.fixture(scope="session")
def evolution_run():
    """Factory returning (config, result) for a chi value on the standard
    [0, 160] protocol grid (dx = 0.2, dt = dx^2/10, t_max = 38), memoized."""

    def factory(chi, d=1.0):
        key = (chi, d)
        if key not in _RUN_CACHE:
            grid = grid_make(0.0, 160.0, 801)
            times = sorted({10.0, 15.0, 20.0, 25.0, 30.0}
                           | {float(t) for t in range(24, 39)})
            config = RunConfig(Params(chi, d), grid, dt=grid.dx ** 2 / 10.0,
                               t_max=38.0, snapshot_times=times)
            _RUN_CACHE[key] = (config, run(config))
        return _RUN_CACHE[key]

    return factory


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


# --- acceptance reporting ----------------------------------------------------

_CRITERION_LINES = {}


def record_criterion(number, description, passed):
    """Store and print one pass/fail line per acceptance criterion."""
    verdict = "PASS" if passed else "FAIL"
    line = f"criterion {number}: {verdict} - {description}"
    _CRITERION_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_CRITERION_LINES):
        terminalreporter.write_line(_CRITERION_LINES[number])
