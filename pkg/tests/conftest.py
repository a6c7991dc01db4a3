import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from casecontrol import CountData, CovariateSpace

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def binary_space():
    return CovariateSpace(np.array([[0.0], [1.0]]))


@pytest.fixture
def reference_data(binary_space):
    # (n00, n01, n10, n11) = (6, 2, 3, 4)
    return CountData(binary_space, np.array([[6, 2], [3, 4]]))


@pytest.fixture
def three_point_space():
    return CovariateSpace(np.array([[0.0], [1.0], [2.0]]))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
