import math

import numpy as np
import pytest

from mbvdkit import ResonatorSpec, optimize_static_caps

# Lines printed by the acceptance suite, shown again in the terminal summary.
ACCEPTANCE_LINES = []

SHUNT = ResonatorSpec(fs=33e9, k2=0.30, q=13.0, c0=100e-15)
SERIES = ResonatorSpec(fs=38e9, k2=0.25, q=10.0, c0=100e-15)
TEMPLATE = [("shunt", SHUNT), ("series", SERIES), ("shunt", SHUNT)]
BAND = (35e9, 42e9)


@pytest.fixture(scope="session")
def template():
    return list(TEMPLATE)


@pytest.fixture(scope="session")
def ref_grid():
    return np.linspace(30e9, 48e9, 2001)


@pytest.fixture(scope="session")
def synthesized(ref_grid):
    """Static capacitances chosen for the three-stage reference ladder."""
    return optimize_static_caps(TEMPLATE, BAND, ref_grid)


@pytest.fixture
def brickwall():
    """-2 dB between 36 and 42 GHz, -30 dB elsewhere, on a fine grid."""
    from mbvdkit import FrequencySweep

    f = np.linspace(30e9, 48e9, 18001)
    level = np.where((f >= 36e9) & (f <= 42e9), -2.0, -30.0)
    s = np.zeros((f.size, 2, 2), dtype=complex)
    s[:, 1, 0] = s[:, 0, 1] = 10 ** (level / 20)
    return FrequencySweep(f, s)


def ac6_params():
    from mbvdkit import MbvdParams, mbvd_from_spec

    core = mbvd_from_spec(ResonatorSpec(fs=33e9, k2=0.30, q=13.0, c0=80e-15))
    ls = 1 / ((2 * math.pi * 50e9) ** 2 * core.c0)
    return MbvdParams(core.c0, core.rm, core.lm, core.cm, 1.0, ls)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
