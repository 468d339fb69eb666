from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from tranchesim.fixedpoint import WAD
from tranchesim.insurance import PeriodConfig, Policy
from tranchesim.ledger import GENESIS, Ledger
from tranchesim.venues import YieldVenue

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


class Bench:
    """Ledger, two venues and a policy wired together with S=10, T1=110, T2=120, T3=130."""

    def __init__(self, rate_x=0, rate_y=0):
        self.ledger = Ledger()
        self.ledger.register_token("C", GENESIS)
        self.vx = YieldVenue("x", self.ledger, rate_per_step=rate_x)
        self.vy = YieldVenue("y", self.ledger, rate_per_step=rate_y)
        self.cfg = PeriodConfig(10, 110, 120, 130)
        self.policy = Policy(self.cfg, self.ledger, self.vx, self.vy)

    def fund(self, who, whole):
        self.ledger.mint("C", who, whole * WAD, GENESIS)

    def bal(self, token, who):
        return self.ledger.balance_of(token, who)

    def accrue(self, dt):
        self.vx.accrue(dt)
        self.vy.accrue(dt)

    def objects(self):
        return (self.ledger, self.vx, self.vy, self.policy)

    def fingerprint(self):
        return repr([o.snapshot() for o in self.objects()])


@pytest.fixture
def bench():
    return Bench()


@pytest.fixture
def scenarios_dir():
    return SCENARIOS


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.call_report = rep


@pytest.fixture
def criterion(request):
    """Print one PASS/FAIL line for an acceptance criterion, whatever the capture mode."""
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    yield
    rep = getattr(request.node, "call_report", None)
    verdict = "PASS" if rep is not None and rep.passed else "FAIL"
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    line = f"[{verdict}] criterion {number}: {title}"
    if reporter is not None:
        reporter.write_line("")
        reporter.write_line(line)
    else:
        print(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
