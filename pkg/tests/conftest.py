import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stpath.instance import MetricInstance

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

S, A, T = 0, 1, 2


def path_metric() -> MetricInstance:
    """s=0, a=1, t=2 with c(s,a)=c(a,t)=1 and c(s,t)=2."""
    return MetricInstance(np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float), S, T, name="path3")


@pytest.fixture
def path3():
    return path_metric()


@pytest.fixture
def two():
    return MetricInstance(np.array([[0, 5], [5, 0]], dtype=float), 0, 1, name="two")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.TITLES):
        if n in results:
            ok, detail = results[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {mod.TITLES[n]}: {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RUN  {mod.TITLES[n]}")
