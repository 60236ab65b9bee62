import copy
import json

import pytest

from cvcc.config import load_config, parse_config
from cvcc.errors import ParseError, ValidationError

BASE = {
    "name": "t", "duration_s": 1.0,
    "nodes": [{"id": "a", "role": "OBU", "position": [0, 0]}, {"id": "r", "role": "RSU", "position": [1, 0]},
              {"id": "e", "role": "Adversary", "position": [2, 0]}],
    "links": [{"a": "a", "b": "r", "kind": "DSRC"}],
    "workload": [{"src": "a", "dst": "r", "channel": "V2R", "payload_size": 8, "period_s": 0.1, "count": 1}],
}


def mutate(fn):
    doc = copy.deepcopy(BASE)
    fn(doc)
    return doc


def test_base_parses():
    cfg = parse_config(BASE)
    assert cfg.group == "toy" and cfg.delta_ms == 300 and cfg.workload[0].jitter


@pytest.mark.parametrize("fn, where", [
    (lambda d: d.update(colour="red"), "<root>"),
    (lambda d: d["nodes"][0].update(speed=3), "nodes/0"),
    (lambda d: d["links"][0].update(kind="Bluetooth"), "links/0/kind"),
    (lambda d: d.update(group="ed25519"), "group"),
    (lambda d: d["workload"][0].update(count=0), "workload/0/count"),
    (lambda d: d.pop("nodes"), "<root>"),
])
def test_schema_errors_name_the_path(fn, where):
    with pytest.raises(ParseError, match=f"^{where}"):
        parse_config(mutate(fn))


@pytest.mark.parametrize("fn, msg", [
    (lambda d: d["workload"][0].update(channel="V2V"), "V2V runs OBU->OBU"),
    (lambda d: d["workload"][0].update(dst="ghost"), "unknown node"),
    (lambda d: d["nodes"].append({"id": "a", "role": "OBU", "position": [0, 0]}), "duplicate node"),
    (lambda d: d["links"].append({"a": "r", "b": "a", "kind": "WiFi"}), "duplicate link"),
    (lambda d: d.update(adversary={"node": "a", "actions": []}), "role Adversary"),
    (lambda d: d.update(adversary={"node": "e", "actions": [{"action": "Replay"}]}), "match clause"),
    (lambda d: d.update(adversary={"node": "e", "actions": [{"action": "Impersonate", "at_s": 0.1}]}), "Impersonate needs"),
    (lambda d: d["nodes"][0].update(waypoints=[[2, 0, 0], [1, 0, 0]]), "time order"),
])
def test_cross_field_validation(fn, msg):
    with pytest.raises(ValidationError, match=msg):
        parse_config(mutate(fn))


def test_load_config_errors(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "t",\n  oops}')
    with pytest.raises(ParseError, match="line 2"):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(BASE))
    assert load_config(good).name == "t"
