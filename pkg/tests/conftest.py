import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("dpt", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dpt")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    if mod is None:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 11):
        ok, detail = mod.RESULTS.get(n, (False, "not run or did not reach its verdict"))
        terminalreporter.write_line(f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}")
