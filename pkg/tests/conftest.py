import pytest
from hypothesis import HealthCheck, settings

from submodgap.instances import build_diamond, metric_closure

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def d1():
    return build_diamond(1)


@pytest.fixture(scope="session")
def d2():
    return build_diamond(2)


@pytest.fixture(scope="session")
def d2_metric(d2):
    return metric_closure(d2.graph)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
