import sys

import numpy as np
import pytest
from hypothesis import settings

from circlefol.fourier import PeriodicFunction

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def random_periodic(rng, n_modes, amp=1.0, decay=0.5, mean=0.0, max_mode=None):
    """Real trigonometric polynomial with geometrically decaying coefficients."""
    k = np.arange(n_modes + 1)
    spec = amp * (rng.standard_normal(n_modes + 1) + 1j * rng.standard_normal(n_modes + 1)) * np.exp(-decay * k)
    spec[0] = mean
    spec[(n_modes // 2 if max_mode is None else max_mode) + 1:] = 0.0
    return PeriodicFunction(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and getattr(mod, "LINES", None):
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
