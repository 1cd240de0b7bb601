import json

import pytest

from dynlist.engine import SimParams, run_scenario
from dynlist.scenario_io import (
    ScenarioFormatError,
    dumps_scenario,
    dumps_trace,
    parse_scenario,
)
from dynlist.workload import GenParams, make_scenario


def sample_scenario():
    return make_scenario(GenParams(seed=4, protocol="batched_clique", n0=6, rounds=8, c=3),
                         SimParams(s=4, c=3))


def test_round_trip_is_byte_identical():
    text = dumps_scenario(sample_scenario())
    assert dumps_scenario(parse_scenario(text)) == text


def test_parse_rejects_bad_json():
    with pytest.raises(ScenarioFormatError, match="not valid JSON"):
        parse_scenario("{nope")


def test_parse_names_the_offending_field():
    doc = json.loads(dumps_scenario(sample_scenario()))
    doc["rounds"][2][0] = {"op": "teleport"}
    with pytest.raises(ScenarioFormatError, match=r"rounds\[2\]\[0\].op"):
        parse_scenario(json.dumps(doc))
    doc = json.loads(dumps_scenario(sample_scenario()))
    del doc["initial_graph"]["nodes"]
    with pytest.raises(ScenarioFormatError, match="initial_graph"):
        parse_scenario(json.dumps(doc))
    doc = json.loads(dumps_scenario(sample_scenario()))
    doc["protocol"] = "carrier-pigeon"
    with pytest.raises(ScenarioFormatError, match="protocol"):
        parse_scenario(json.dumps(doc))
    doc = json.loads(dumps_scenario(sample_scenario()))
    doc["initial_graph"]["edges"].append([1, 99])
    with pytest.raises(ScenarioFormatError, match="unknown node"):
        parse_scenario(json.dumps(doc))


def test_parse_rejects_oversized_ids():
    doc = json.loads(dumps_scenario(sample_scenario()))
    doc["params"]["id_bits"] = 2
    with pytest.raises(ScenarioFormatError, match="does not fit"):
        parse_scenario(json.dumps(doc))


def test_trace_serialization_is_stable_and_sorted():
    sc = sample_scenario()
    trace = run_scenario(sc.initial, sc.rounds, sc.protocol, sc.params)
    a = dumps_trace(trace)
    b = dumps_trace(run_scenario(sc.initial, sc.rounds, sc.protocol, sc.params))
    assert a == b
    doc = json.loads(a)
    assert doc["format"] == "dynlist-trace-v1"
    nodes = [entry["node"] for entry in doc["rounds"][0]["listings"]]
    assert nodes == sorted(nodes)
    for entry in doc["rounds"][-1]["listings"]:
        assert entry["triangles"] == sorted(entry["triangles"])
    assert doc["rounds"][0]["verdict"]["sound"] is True


def test_scenario_updates_serialized_canonically():
    text = dumps_scenario(sample_scenario())
    doc = json.loads(text)
    for rnd in doc["rounds"]:
        keys = [(u["op"], u.get("node", -1), u.get("u", -1), u.get("v", -1)) for u in rnd]
        assert keys == sorted(keys)
