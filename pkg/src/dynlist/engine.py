"""Synchronous round driver: apply updates, exchange messages, list.

A round runs in three strictly ordered phases.  First the topology
changes and every surviving node observes its adjacency diff; the state
of a node deleted this round is dropped on the spot, so it neither sends
nor lists anything.  Second, each node's protocol emits messages, which
are delivered only along links that exist in the post-update graph, one
concatenated message per ordered pair, each metered in bits.  Third,
every node folds its diff and inbox into its listings, and the round's
collective output is snapshotted.

Within a phase the per-node calls are independent; the engine simply
runs them in sorted node order, which also pins down the trace bytes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import oracle
from .graph import (
    EMPTY_DIFF,
    AdjacencyDiff,
    DeleteNode,
    Graph,
    InsertNode,
    NodeId,
    RoundUpdates,
    RoundValidationError,
    apply_round,
    diff_adjacency,
)
from .messages import EncodingParams, Message, message_bits
from .oracle import Verdict
from .protocols import (
    NodeState,
    Protocol,
    ProtocolError,
    initial_listings,
    resolve_protocol,
)


@dataclass(frozen=True)
class SimParams:
    """Run-wide knobs: target clique size, per-node incidence bound for
    batched rounds, and the message encoding widths."""

    s: int = 4
    c: int = 4
    encoding: EncodingParams = field(default_factory=EncodingParams)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "c": self.c,
            "id_bits": self.encoding.id_bits,
            "count_bits": self.encoding.count_bits,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimParams":
        return cls(
            s=int(d.get("s", 4)),
            c=int(d.get("c", 4)),
            encoding=EncodingParams(
                id_bits=int(d.get("id_bits", 32)),
                count_bits=int(d.get("count_bits", 8)),
            ),
        )


@dataclass(frozen=True)
class NodeListing:
    """One node's listings as frozen at the end of a round."""

    triangles: frozenset[frozenset[NodeId]] = frozenset()
    wedges: frozenset[tuple[NodeId, frozenset[NodeId]]] = frozenset()
    cliques: frozenset[frozenset[NodeId]] = frozenset()


@dataclass
class RoundReport:
    round_index: int
    listings: dict[NodeId, NodeListing]
    max_message_bits: int
    messages_sent: int
    verdict: Verdict | None = None


@dataclass
class Trace:
    protocol: str
    params: SimParams
    reports: list[RoundReport]

    @property
    def all_pass(self) -> bool:
        return all(r.verdict is not None and r.verdict.passed for r in self.reports)

    @property
    def max_message_bits(self) -> int:
        return max((r.max_message_bits for r in self.reports), default=0)


class NetworkState:
    """Everything the engine owns while a scenario runs: the ground-truth
    graph plus one NodeState per live node."""

    def __init__(self, graph: Graph, states: dict[NodeId, NodeState],
                 protocol: Protocol, params: SimParams):
        self.graph = graph
        self.states = states
        self.protocol = protocol
        self.params = params
        self.profile = protocol.profile(params.c)

    @classmethod
    def from_initial(cls, g0: Graph, proto: Protocol | str, params: SimParams) -> "NetworkState":
        proto = resolve_protocol(proto)
        _check_id_width(g0.nodes, params.encoding)
        states = {v: initial_listings(g0, v, proto) for v in g0.nodes}
        return cls(g0.copy(), states, proto, params)

    def snapshot_listings(self) -> dict[NodeId, NodeListing]:
        out = {}
        s = self.params.s
        proto = self.protocol
        for v in sorted(self.states):
            st = self.states[v]
            cached = st._cache.get("listing")
            if cached is None:
                cached = st._cache["listing"] = NodeListing(
                    triangles=st.triangles_frozen(),
                    wedges=st.wedges_frozen() if proto.lists_wedges else frozenset(),
                    cliques=st.derived_cliques(s) if proto.derives_cliques else frozenset(),
                )
            out[v] = cached
        return out


def _check_id_width(ids, enc: EncodingParams) -> None:
    limit = 1 << enc.id_bits
    for v in ids:
        if not 0 <= v < limit:
            raise ValueError(f"node ID {v} does not fit in {enc.id_bits} bits")


def run_round(net: NetworkState, r: RoundUpdates, round_index: int = 0) -> RoundReport:
    """Drive one synchronous round and report its collective output."""
    r = RoundUpdates(r.updates, net.profile)

    # Phase 1: the topology changes; deleted nodes fall silent for good.
    before = net.graph
    try:
        after = apply_round(before, r)
    except RoundValidationError as e:
        raise RoundValidationError(e.result, round_index) from None
    touched: set[NodeId] = set()
    for u in r.updates:
        if isinstance(u, InsertNode):
            _check_id_width((u.node,), net.params.encoding)
            touched.add(u.node)
            touched.update(u.nbrs)
            net.states[u.node] = NodeState(u.node)
        elif isinstance(u, DeleteNode):
            touched.update(before.neighbors(u.node))
            del net.states[u.node]
        else:
            touched.add(u.u)
            touched.add(u.v)
    diffs: dict[NodeId, AdjacencyDiff] = {}
    for v in sorted(touched):
        if after.has_node(v):
            d = diff_adjacency(before, after, v)
            if not d.is_empty:
                diffs[v] = d
            net.states[v].set_nbrs(after.neighbors(v))

    # Phase 2: emit and deliver over the post-update links only.
    proto = net.protocol
    inboxes: dict[NodeId, dict[NodeId, Message]] = {}
    max_bits = 0
    sent = 0
    for v in sorted(diffs):
        outbox = proto.emit(net.states[v], diffs[v])
        for target, msg in sorted(outbox.items()):
            if msg.is_empty:
                continue
            if not after.has_edge(v, target):
                raise ProtocolError(f"node {v} addressed {target} over a missing link")
            box = inboxes.setdefault(target, {})
            box[v] = box[v].merge(msg) if v in box else msg
    cap = net.params.c if not proto.single_update else 1
    for target in sorted(inboxes):
        for sender in sorted(inboxes[target]):
            msg = inboxes[target][sender]
            if proto.flag_messages and (msg.new_ids or msg.del_ids):
                raise ProtocolError(f"node {sender} sent IDs under a flag-only protocol")
            if not proto.flag_messages and msg.uses_flags:
                raise ProtocolError(f"node {sender} sent bare flags under an ID-carrying protocol")
            if not proto.flag_messages and msg.id_count > cap:
                raise ProtocolError(
                    f"message {sender}->{target} carries {msg.id_count} IDs, cap is {cap}")
            max_bits = max(max_bits, message_bits(msg, net.params.encoding))
            sent += 1

    # Phase 3: absorb; only nodes with a diff or an inbox can change.
    for v in sorted(set(diffs) | set(inboxes)):
        proto.absorb(net.states[v], diffs.get(v, EMPTY_DIFF), inboxes.get(v, {}))

    net.graph = after
    return RoundReport(
        round_index=round_index,
        listings=net.snapshot_listings(),
        max_message_bits=max_bits,
        messages_sent=sent,
    )


def run_scenario(g0: Graph, rounds: Sequence[RoundUpdates], proto: Protocol | str,
                 params: SimParams | None = None, verify: bool = True,
                 s_values: Sequence[int] | None = None) -> Trace:
    """Run a whole scenario and return its trace.

    The trace's first report (round 0) is the initial state, where every
    node lists from full knowledge of the starting graph.  With
    ``verify`` on, each report carries an oracle verdict; ``s_values``
    widens the clique sizes the verdict certifies beyond ``params.s``.
    Identical inputs always produce identical traces.
    """
    proto = resolve_protocol(proto)
    params = params or SimParams()
    net = NetworkState.from_initial(g0, proto, params)
    first = RoundReport(0, net.snapshot_listings(), max_message_bits=0, messages_sent=0)
    if verify:
        first.verdict = oracle.check_round(first, net.graph, proto, params, s_values)
    reports = [first]
    for i, r in enumerate(rounds, start=1):
        rep = run_round(net, r, i)
        if verify:
            rep.verdict = oracle.check_round(rep, net.graph, proto, params, s_values)
        reports.append(rep)
    return Trace(protocol=proto.name, params=params, reports=reports)
