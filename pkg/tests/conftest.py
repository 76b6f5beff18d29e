import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from expgram.experiments import smoothness_comparison  # noqa: E402
from expgram.sim import TWO_PI, Ar2, Mixture  # noqa: E402

#: Set EXPGRAM_FULL=1 to run ensemble checks at their full replicate counts.
FULL = os.environ.get("EXPGRAM_FULL", "") not in ("", "0")

SMOOTHNESS_OMEGAS = (TWO_PI * 0.1, TWO_PI * 0.05, TWO_PI * 0.45)


@pytest.fixture(scope="session")
def smoothness_ar2():
    """EP/QP smoothness statistics on AR(2) replicates (n = 200), shared by
    the acceptance run and the per-replicate ordering check."""
    reps = 500 if FULL else 100
    return smoothness_comparison(Ar2(), 200, reps, seed=20261009, omegas=SMOOTHNESS_OMEGAS)


@pytest.fixture(scope="session")
def smoothness_mixture():
    reps = 500 if FULL else 100
    return smoothness_comparison(Mixture(), 200, reps, seed=20261019,
                                 omegas=SMOOTHNESS_OMEGAS[1:])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


#: One line per acceptance criterion, filled in by tests/test_acceptance.py
#: and echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
