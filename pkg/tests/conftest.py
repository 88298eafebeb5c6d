import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("sqrtcorr", max_examples=1000, derandomize=True, deadline=None)
settings.load_profile("sqrtcorr")

# Smallest cutoff from which the two-triangle window bound is asserted.  A scan
# over T in {10, 30, 100, 300, 1000, 10000}, five windows and 1000 shifts each
# found no violation at any of them; the value is pinned at the lowest scanned T.
LEMMA_T0 = 10


@pytest.fixture
def lemma_t0():
    return LEMMA_T0


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
