import numpy as np
import pytest

_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _ACCEPTANCE.append((int(props["criterion"]), report.passed, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num, ok, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    passed = sum(ok for _, ok, _ in _ACCEPTANCE)
    terminalreporter.write_line(f"{passed}/{len(_ACCEPTANCE)} criteria passed")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

