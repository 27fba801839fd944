import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from decoykit.model import ProtocolSpec, SystemParams  # noqa: E402

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def worked_params():
    return SystemParams(epsilon=1e-7, n_total=1e10, y0=2e-6, visibility=0.98, eta=1e-3)


@pytest.fixture
def worked_protocol():
    return ProtocolSpec.from_lists((0.0, 0.063, 0.655), (0.01, 0.0275, 0.9625))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        if hasattr(rep, "wasxfail"):
            status = "FAIL (known, see ledger)"
        else:
            status = "PASS" if rep.passed else "FAIL"
        _ACCEPTANCE[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status:<24s} {title}")
