import json
from pathlib import Path

import pytest

from ddcontrol import _accel

DATA_DIR = Path(__file__).parent / "data"

_ACCEPTANCE: dict[str, list] = {}


@pytest.fixture(scope="session")
def expected():
    return json.loads((DATA_DIR / "expected.json").read_text())


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    if request.param == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(_accel, "USE_NUMBA", request.param == "numba")
    return request.param


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        label = f"criterion {marker.args[0]}: {item.name}"
        _ACCEPTANCE.setdefault(label, []).append(rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: (int(s.split()[1].rstrip(":")), s)):
        outcomes = _ACCEPTANCE[label]
        if "failed" in outcomes:
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"[{status}] {label}")
