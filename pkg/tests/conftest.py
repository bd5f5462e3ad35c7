import math

import numpy as np
import pytest

from phaserelax.model import reference_params

DEG = math.pi / 180.0


@pytest.fixture
def ref():
    return reference_params()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def naive_power(params, t, theta):
    """Complex double sum over all (J, J') pairs, no symmetry used."""
    J = np.arange(params.jmax + 1)
    from phaserelax.model import legendre_table

    c = (2 * J + 1) * np.exp(-((J - params.j_bar) ** 2) / (2 * params.d**2)) * legendre_table(params.jmax, math.cos(theta))
    k = J[:, None] - J[None, :]
    phase = np.exp(1j * (params.phi - params.omega * t) * k - params.beta * np.abs(k) * t)
    return math.exp(-params.gamma * t) * np.sum(np.outer(c, c) * phase)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line, then assert it."""

    def record(label, passed, detail, seconds=None, budget=None):
        ok = bool(passed) and (budget is None or seconds <= budget)
        timing = "" if seconds is None else f" [{seconds:.1f} s / {budget:g} s]"
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}{timing}"
        request.config.stash[ACCEPTANCE].append(line)
        print(line)
        assert ok, line

    return record
