import numpy as np
import pytest

# criterion id -> list of outcomes, filled by test_acceptance via the `criterion` fixture
_CRITERIA: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Register the acceptance criterion a test belongs to."""

    def register(cid: int, label: str):
        request.node.user_properties.append(("criterion", (cid, label)))

    return register


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            cid, label = value
            _CRITERIA.setdefault(cid, [label, []])[1].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA):
        label, outcomes = _CRITERIA[cid]
        status = "PASS" if all(outcomes) else "FAIL"
        detail = f"{sum(outcomes)}/{len(outcomes)} checks"
        terminalreporter.write_line(f"{status}  criterion {cid:2d}  {label}  ({detail})")
