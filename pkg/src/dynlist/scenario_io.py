"""Scenario and trace files: canonical JSON with a stable byte layout.

Both formats sort every key and every ID list, so a byte comparison of
two files is a semantic comparison.  ``dumps_scenario(parse_scenario(s))``
returns the input unchanged for canonical files, which is what the
golden-file tests rely on.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .engine import SimParams, Trace
from .graph import (
    DeleteEdge,
    DeleteNode,
    Graph,
    InsertEdge,
    InsertNode,
    RoundUpdates,
    Update,
)
from .protocols import PROTOCOLS, resolve_protocol

SCENARIO_FORMAT = "dynlist-scenario-v1"
TRACE_FORMAT = "dynlist-trace-v1"


class ScenarioFormatError(Exception):
    """Input file rejected; the message names the offending field."""


@dataclass
class Scenario:
    protocol: str
    params: SimParams
    initial: Graph
    rounds: list[RoundUpdates]


def _fail(path: str, msg: str):
    raise ScenarioFormatError(f"{path}: {msg}")


def _get(obj: dict, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        _fail(path, f"missing field {key!r}")
    return obj[key]


def _node_id(x: Any, path: str) -> int:
    if not isinstance(x, int) or isinstance(x, bool) or x < 0:
        _fail(path, f"node IDs must be non-negative integers, got {x!r}")
    return x


def parse_update(obj: dict, path: str) -> Update:
    op = _get(obj, "op", path)
    if op == "insert_node":
        node = _node_id(_get(obj, "node", path), f"{path}.node")
        nbrs = _get(obj, "nbrs", path)
        if not isinstance(nbrs, list):
            _fail(f"{path}.nbrs", "expected a list")
        return InsertNode(node, frozenset(_node_id(x, f"{path}.nbrs") for x in nbrs))
    if op == "delete_node":
        return DeleteNode(_node_id(_get(obj, "node", path), f"{path}.node"))
    if op in ("insert_edge", "delete_edge"):
        u = _node_id(_get(obj, "u", path), f"{path}.u")
        v = _node_id(_get(obj, "v", path), f"{path}.v")
        if u == v:
            _fail(path, f"edge endpoints must differ, got {u}")
        return InsertEdge(u, v) if op == "insert_edge" else DeleteEdge(u, v)
    _fail(f"{path}.op", f"unknown op {op!r}")


def update_to_obj(u: Update) -> dict:
    if isinstance(u, InsertNode):
        return {"op": "insert_node", "node": u.node, "nbrs": sorted(u.nbrs)}
    if isinstance(u, DeleteNode):
        return {"op": "delete_node", "node": u.node}
    if isinstance(u, InsertEdge):
        return {"op": "insert_edge", "u": u.u, "v": u.v}
    return {"op": "delete_edge", "u": u.u, "v": u.v}


def _update_sort_key(obj: dict):
    return (obj["op"], obj.get("node", -1), obj.get("u", -1), obj.get("v", -1))


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        _fail("$", "top level must be an object")
    fmt = _get(doc, "format", "$")
    if fmt != SCENARIO_FORMAT:
        _fail("$.format", f"expected {SCENARIO_FORMAT!r}, got {fmt!r}")
    proto_name = _get(doc, "protocol", "$")
    if proto_name not in PROTOCOLS:
        _fail("$.protocol", f"unknown protocol {proto_name!r}; expected one of {sorted(PROTOCOLS)}")
    try:
        params = SimParams.from_dict(_get(doc, "params", "$"))
    except (TypeError, ValueError, AttributeError) as e:
        _fail("$.params", str(e))

    gobj = _get(doc, "initial_graph", "$")
    nodes = [_node_id(x, "$.initial_graph.nodes") for x in _get(gobj, "nodes", "$.initial_graph")]
    if len(set(nodes)) != len(nodes):
        _fail("$.initial_graph.nodes", "duplicate node IDs")
    node_set = set(nodes)
    edges = []
    for i, e in enumerate(_get(gobj, "edges", "$.initial_graph")):
        path = f"$.initial_graph.edges[{i}]"
        if not isinstance(e, list) or len(e) != 2:
            _fail(path, "expected a pair [u, v]")
        u, v = (_node_id(x, path) for x in e)
        if u == v:
            _fail(path, "self loop")
        if u not in node_set or v not in node_set:
            _fail(path, f"edge [{u},{v}] references an unknown node")
        edges.append((u, v))
    initial = Graph(nodes, edges)

    limit = 1 << params.encoding.id_bits
    profile = resolve_protocol(proto_name).profile(params.c)
    rounds = []
    for i, rlist in enumerate(_get(doc, "rounds", "$")):
        path = f"$.rounds[{i}]"
        if not isinstance(rlist, list):
            _fail(path, "expected a list of updates")
        updates = tuple(parse_update(obj, f"{path}[{j}]") for j, obj in enumerate(rlist))
        rounds.append(RoundUpdates(updates, profile))
    for v in node_set:
        if v >= limit:
            _fail("$.initial_graph.nodes", f"node ID {v} does not fit in {params.encoding.id_bits} bits")
    return Scenario(proto_name, params, initial, rounds)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "format": SCENARIO_FORMAT,
        "protocol": s.protocol,
        "params": s.params.to_dict(),
        "initial_graph": {
            "nodes": sorted(s.initial.nodes),
            "edges": [list(e) for e in sorted(s.initial.edges())],
        },
        "rounds": [
            sorted((update_to_obj(u) for u in r.updates), key=_update_sort_key)
            for r in s.rounds
        ],
    }


def dumps_scenario(s: Scenario) -> str:
    return _dumps(scenario_to_dict(s))


def trace_to_dict(t: Trace) -> dict:
    rounds = []
    for rep in t.reports:
        listings = []
        for v in sorted(rep.listings):
            entry = rep.listings[v]
            listings.append({
                "node": v,
                "triangles": sorted(sorted(x) for x in entry.triangles),
                "wedges": sorted([c, *sorted(pair)] for c, pair in entry.wedges),
                "cliques": sorted(sorted(x) for x in entry.cliques),
            })
        rounds.append({
            "round": rep.round_index,
            "listings": listings,
            "max_message_bits": rep.max_message_bits,
            "messages_sent": rep.messages_sent,
            "verdict": rep.verdict.to_dict() if rep.verdict is not None else None,
        })
    return {
        "format": TRACE_FORMAT,
        "protocol": t.protocol,
        "params": t.params.to_dict(),
        "rounds": rounds,
    }


def dumps_trace(t: Trace) -> str:
    return _dumps(trace_to_dict(t))


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"
