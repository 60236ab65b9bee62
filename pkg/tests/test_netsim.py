import json
import random
from importlib import resources

import pytest

from cvcc.cli import bundled_scenarios, resolve_scenario
from cvcc.config import load_config, parse_config
from cvcc.errors import OutOfRange
from cvcc.netsim import (
    CELLULAR,
    DSRC,
    WIFI,
    EventKind,
    SimulationError,
    World,
    default_link,
    parse_trace,
    run_scenario,
    transmit,
)
from cvcc.netsim.links import CELLULAR_LATENCY_RANGE

GOLDEN = resources.files("cvcc") / "scenarios" / "golden"


def scenario(name):
    return load_config(resolve_scenario(name))


def tiny(count=1, **extra):
    doc = {
        "name": "tiny", "duration_s": 1.0,
        "nodes": [{"id": "a", "role": "OBU", "position": [0, 0]}, {"id": "r", "role": "RSU", "position": [10, 0]}],
        "links": [{"a": "a", "b": "r", "kind": "DSRC"}],
        "workload": [{"src": "a", "dst": "r", "channel": "V2R", "payload_size": 16,
                      "period_s": 0.1, "count": count, "jitter": False}] if count else [],
    }
    doc.update(extra)
    return parse_config(doc)


# --- link model -------------------------------------------------------------

def test_dsrc_1024_bytes():
    want = 200e-6 + 8192 / 27e6
    assert abs(transmit(DSRC, 1024) - want) / want < 1e-12
    assert abs(transmit(DSRC, 1024) - 5.034e-4) < 1e-7


def test_wifi_zero_latency():
    assert transmit(default_link("WiFi", latency=0.0), 6750) == pytest.approx(1.0e-3, rel=1e-12)


def test_serialization_term_is_linear():
    rng = random.Random(1)
    for link in (DSRC, WIFI, default_link("Wired")):
        for size in rng.sample(range(1, 60_000), 10):
            one = transmit(link, size) - link.latency
            two = transmit(link, 2 * size) - link.latency
            assert abs(two - 2 * one) <= 1e-12 * two


def test_cellular_is_two_hops_and_range_is_enforced():
    assert transmit(CELLULAR, 100) == pytest.approx(2 * (1.5 + 800 / 2e6), rel=1e-12)
    with pytest.raises(OutOfRange):
        transmit(DSRC, 100, 300.5)
    assert transmit(DSRC, 100, 300.0) > 0
    with pytest.raises(ValueError):
        transmit(DSRC, 0)


def test_cellular_latency_drawn_within_range():
    cfg = scenario("honest-mixed")
    for seed in range(5):
        w = World(cfg, seed)
        cells = [m for m in w.links.values() if m.kind.value == "Cellular"]
        assert cells and all(CELLULAR_LATENCY_RANGE[0] <= m.latency <= CELLULAR_LATENCY_RANGE[1] for m in cells)


def test_simulated_deliveries_match_transmit_formula():
    w = World(tiny(count=1), 0).run()
    sizes = [77 + 16 + 32, 77 + 32 + 32, 77 + 32 + 32]
    t = 0.0
    for rec, size in zip(w.trace, sizes):
        t += transmit(DSRC, size)
        assert rec.size == size
        assert abs(rec.time - t) <= 1e-12 * t


# --- event engine -----------------------------------------------------------

def test_empty_workload():
    w = World(tiny(count=0), 0).run()
    assert w.clock == 0.0 and w.pending == 0 and len(w.trace) == 0


def test_one_v2r_request_event_sequence():
    w = World(tiny(count=1), 0).run()
    kinds = [k for _, k, _ in w.event_log]
    assert kinds == ["Generate", "Deliver", "Deliver", "Deliver"]
    assert [n for _, _, n in w.event_log] == ["a", "r", "a", "r"]
    assert w.sessions["established"] == 1


def test_clock_monotone_and_regression_detected():
    w = World(scenario("honest-mixed"), 3).run()
    times = [t for t, _, _ in w.event_log]
    assert times == sorted(times)
    w = World(tiny(count=2), 0)
    w.step()
    w.schedule(w.clock - 1.0, EventKind.MOVE, "a", (0, 0))
    with pytest.raises(SimulationError):
        w.step()


@pytest.mark.parametrize("name", ["honest-v2r", "honest-mixed", "replay-attack", "tamper-attack",
                                  "impersonation-attack", "mitm-attack", "mobility"])
def test_conservation(name):
    w = World(scenario(name), 2).run()
    r = w.report()
    f = r.frames
    assert f["generated"] == w.generated
    assert f["accepted"] + sum(f["rejected"].values()) + sum(f["dropped"].values()) == f["generated"]


def test_determinism_same_seed():
    cfg = scenario("replay-attack")
    t1, r1 = run_scenario(cfg, 9)
    t2, r2 = run_scenario(cfg, 9)
    assert t1.serialize() == t2.serialize() and r1.to_json() == r2.to_json()


def test_seed_changes_timings_not_statistics():
    cfg = scenario("honest-v2r")
    runs = [run_scenario(cfg, s) for s in range(5)]
    stats = {json.dumps(r.frames, sort_keys=True) for _, r in runs}
    assert len(stats) == 1
    assert len({t.serialize() for t, _ in runs}) == 5


@pytest.mark.parametrize("name", sorted(bundled_scenarios()))
def test_golden_traces(name):
    trace, _ = run_scenario(scenario(name), 1)
    golden = (GOLDEN / f"{name}.txt").read_text()
    assert trace.serialize() == golden
    assert len(parse_trace(golden)) == len(trace)


def test_honest_v2r_bytes_sent_analytic():
    trace, rep = run_scenario(scenario("honest-v2r"), 1)
    per_session = (77 + 128 + 32) + (77 + 32 + 32) + (77 + 32 + 32)
    assert rep.bytes_sent == {"V2V": 0, "V2R": 10 * per_session, "R2VC": 0, "V2VC": 0}
    assert sum(r.size for r in trace) == 10 * per_session


def test_mobility_drops_exactly_out_of_range_frames():
    w = World(scenario("mobility"), 1).run()
    for rec in w.trace:
        # obu1 leaves (0, 0) at t=0 and reaches (800, 0) at t=2; rsu1 sits at x=50.
        send_time = rec.time
        if rec.outcome == "dropped-out-of-range":
            assert abs(400 * send_time - 50) > 300
        else:
            assert rec.outcome == "accepted"
            assert abs(400 * send_time - 50) < 300 + 400 * 1e-3
    assert any(r.outcome == "dropped-out-of-range" for r in w.trace)


def test_replay_scenario_outcomes():
    _, rep = run_scenario(scenario("replay-attack"), 1)
    adv = rep.adversary
    assert adv["accepted"] == 0 and adv["injected"] == 7
    assert adv["rejected"]["ReplayDetected"] + adv["rejected"]["StaleTimestamp"] == 7
    assert rep.frames["accepted"] == rep.frames["generated"]


def test_tamper_payload_bit_gives_bad_authenticator():
    doc = json.loads((resources.files("cvcc") / "scenarios" / "tamper-attack.json").read_text())
    doc["adversary"]["actions"] = [{"action": "Tamper", "field": "payload", "bit": 5,
                                    "match": doc["adversary"]["actions"][0]["match"]}]
    w = World(parse_config(doc), 1).run()
    assert [r.outcome for r in w.trace if r.origin == "adversary"] == ["BadAuthenticator"]


@pytest.mark.parametrize("name", ["impersonation-attack", "mitm-attack", "tamper-attack"])
def test_attacks_accept_nothing(name):
    for seed in range(5):
        _, rep = run_scenario(scenario(name), seed)
        assert rep.adversary["injected"] > 0 and rep.adversary["accepted"] == 0


def test_impersonation_outcomes_are_auth_or_cert():
    _, rep = run_scenario(scenario("impersonation-attack"), 1)
    rej = {k: v for k, v in rep.adversary["rejected"].items() if v}
    assert set(rej) <= {"BadAuthenticator", "BadCertificate"}
