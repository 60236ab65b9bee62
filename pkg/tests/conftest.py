from __future__ import annotations

import pytest

from cvcc.crypto import P256, TOY
from cvcc.protocol import InfraNode, RegistrationAuthority, login, ra_init, vc_id_of

EXPIRY = 10**12


class Deployment:
    """A small registered population: two vehicles, one RSU, the VC."""

    def __init__(self, group, delta_ms=300):
        self.params = ra_init(b"\x07" * 32, group, delta_ms)
        self.ra = RegistrationAuthority(self.params)
        self.creds = {b"alice": b"alice-pw", b"bob": b"bob-pw"}
        self.tpd = {i: self.ra.register_vehicle(i, pw, EXPIRY) for i, pw in self.creds.items()}
        self.alice = login(self.tpd[b"alice"], b"alice", b"alice-pw")
        self.bob = login(self.tpd[b"bob"], b"bob", b"bob-pw")
        self.rsu = InfraNode.for_rsu(self.params, self.ra.register_rsu(b"rsu-1"), revoked=self.ra.revoked)
        self.vc = InfraNode.for_vc(self.params, vc_id_of(b"cloud"), revoked=self.ra.revoked)
        for v in (self.alice, self.bob):
            v.revoked = self.ra.revoked


@pytest.fixture(scope="session")
def toy_net():
    return Deployment(TOY)


@pytest.fixture(scope="session")
def curve_net():
    return Deployment(P256)


@pytest.fixture
def fresh_toy_net():
    return Deployment(TOY)


# Acceptance bookkeeping: one summary line per criterion, taken from the
# first docstring line of each test in test_acceptance.py.
ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__ != "test_acceptance":
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        ACCEPTANCE_RESULTS[item.name] = ("PASS" if rep.passed else "FAIL", f"{doc} ({rep.duration:.2f} s)")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{status}  {name}: {detail}")
