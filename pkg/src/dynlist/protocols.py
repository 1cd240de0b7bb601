"""The four node-local listing protocols as pure state machines.

Each protocol is a pair of functions over a single node's state: given
the node's adjacency diff for the round, ``emit`` produces the outgoing
message per neighbor, and ``absorb`` folds the diff plus the received
inbox into the node's listing state.  The engine owns scheduling and
delivery; nothing here ever looks at the global graph.

Conventions shared by all protocols:

- a listed triangle is a frozenset of three IDs containing the node;
- a listed wedge is ``(center, frozenset({a, b}))`` — the two endpoints
  are adjacent to the center and not to each other — and contains the
  node in one of the three positions;
- the local adjacency snapshot ``nbrs`` always equals the node's true
  post-round neighborhood (the engine refreshes it before emit);
- clique listings are not stored: they are re-derived from the listed
  triangles on demand, which also makes "stop listing a clique once one
  of its triangles dies" automatic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .graph import ALL_UPDATE_KINDS, AdjacencyDiff, Graph, LegalityProfile, NodeId
from .messages import EncodingParams, Message

Outbox = dict[NodeId, Message]
Inbox = Mapping[NodeId, Message]


class ProtocolError(Exception):
    """A protocol was driven outside its contract (batch fed to a
    single-update rule, degenerate listing, ...).  Aborts the run."""


@dataclass(frozen=True)
class CliqueParams:
    """Target clique size for derived listings; sizes below 3 are not
    cliques in this harness's sense."""

    s: int = 4

    def __post_init__(self):
        if self.s < 3:
            raise ValueError(f"clique size must be >= 3, got {self.s}")


class NodeState:
    """One node's local knowledge: adjacency snapshot plus listings."""

    __slots__ = ("self_id", "nbrs", "tri", "wedges", "_cache")

    def __init__(self, self_id: NodeId, nbrs: set[NodeId] | None = None):
        self.self_id = self_id
        self.nbrs: set[NodeId] = set() if nbrs is None else set(nbrs)
        self.tri: set[frozenset[NodeId]] = set()
        self.wedges: set[tuple[NodeId, frozenset[NodeId]]] = set()
        self._cache: dict = {}

    # ---- adjacency ----------------------------------------------------

    def set_nbrs(self, nbrs: set[NodeId]) -> None:
        self.nbrs = set(nbrs)
        self._cache.clear()

    # ---- triangles ----------------------------------------------------

    def start_triangle(self, a: NodeId, b: NodeId) -> None:
        t = frozenset((self.self_id, a, b))
        if len(t) != 3:
            raise ProtocolError(f"node {self.self_id} tried to list degenerate triangle {{{self.self_id},{a},{b}}}")
        self.tri.add(t)
        self._cache.clear()

    def stop_triangle(self, t: frozenset[NodeId]) -> None:
        if t in self.tri:
            self.tri.discard(t)
            self._cache.clear()

    def stop_triangles_with(self, x: NodeId) -> None:
        dead = [t for t in self.tri if x in t]
        if dead:
            self.tri.difference_update(dead)
            self._cache.clear()

    # ---- wedges -------------------------------------------------------

    def start_wedge(self, center: NodeId, a: NodeId, b: NodeId) -> None:
        pair = frozenset((a, b))
        if len(pair) != 2 or center in pair:
            raise ProtocolError(f"node {self.self_id} tried to list degenerate wedge ({center},{{{a},{b}}})")
        if self.self_id != center and self.self_id not in pair:
            raise ProtocolError(f"node {self.self_id} tried to list wedge ({center},{{{a},{b}}}) it is not part of")
        self.wedges.add((center, pair))
        self._cache.clear()

    def stop_wedge(self, center: NodeId, a: NodeId, b: NodeId) -> None:
        key = (center, frozenset((a, b)))
        if key in self.wedges:
            self.wedges.discard(key)
            self._cache.clear()

    def has_wedge(self, center: NodeId, a: NodeId, b: NodeId) -> bool:
        return (center, frozenset((a, b))) in self.wedges

    # ---- snapshots and derivation --------------------------------------

    def triangles_frozen(self) -> frozenset[frozenset[NodeId]]:
        got = self._cache.get("tri")
        if got is None:
            got = self._cache["tri"] = frozenset(self.tri)
        return got

    def wedges_frozen(self) -> frozenset[tuple[NodeId, frozenset[NodeId]]]:
        got = self._cache.get("wedges")
        if got is None:
            got = self._cache["wedges"] = frozenset(self.wedges)
        return got

    def derived_cliques(self, s: int) -> frozenset[frozenset[NodeId]]:
        """Every s-clique this node can certify from its listed triangles.

        A set S of s-1 neighbors qualifies when every pair in S forms a
        listed triangle with this node; the clique is then S plus the
        node itself.  Recomputed (with caching) rather than stored.
        """
        got = self._cache.get(("cliques", s))
        if got is not None:
            return got
        if s == 3:
            out = self.triangles_frozen()
            self._cache[("cliques", s)] = out
            return out

        known: dict[NodeId, set[NodeId]] = {}
        me = self.self_id
        for t in self.tri:
            a, b = (x for x in t if x != me)
            known.setdefault(a, set()).add(b)
            known.setdefault(b, set()).add(a)
        verts = sorted(v for v in known if v in self.nbrs)
        want = s - 1
        found: list[frozenset[NodeId]] = []

        def grow(chosen: list[NodeId], cands: list[NodeId]) -> None:
            if len(chosen) == want:
                found.append(frozenset(chosen + [me]))
                return
            need = want - len(chosen)
            for i, x in enumerate(cands):
                if len(cands) - i < need:
                    break
                nxt = [y for y in cands[i + 1:] if y in known[x]]
                if len(nxt) >= need - 1:
                    grow(chosen + [x], nxt)

        grow([], verts)
        out = frozenset(found)
        self._cache[("cliques", s)] = out
        return out


def derive_cliques(st: NodeState, p: CliqueParams) -> frozenset[frozenset[NodeId]]:
    return st.derived_cliques(p.s)


def initial_listings(g0: Graph, v: NodeId, proto: "Protocol | str") -> NodeState:
    """Seed a node's state from full knowledge of the initial graph.

    Every node starts out listing all triangles it belongs to; under the
    wedge protocol it additionally lists every induced wedge it belongs
    to, in any of the three positions.
    """
    proto = resolve_protocol(proto)
    st = NodeState(v, set(g0.neighbors(v)))
    nbrs = sorted(st.nbrs)
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1:]:
            if g0.has_edge(a, b):
                st.start_triangle(a, b)
            elif proto.lists_wedges:
                st.start_wedge(v, a, b)
    if proto.lists_wedges:
        for x in nbrs:
            for b in g0.neighbors(x):
                if b != v and not g0.has_edge(v, b):
                    st.start_wedge(x, v, b)
    return st


# ---- constant-bandwidth clique protocol (single update per round) -----


def clique_emit(st: NodeState, diff: AdjacencyDiff) -> Outbox:
    """Announce 'something changed next to me' with bare flags.

    A gained neighbor triggers a NEW flag to every current neighbor, a
    lost one a DELETE flag.  A node inserted this round has its whole
    neighborhood in ``added`` and floods NEW, which is the same rule.
    """
    _require_single_change(st, diff)
    if diff.is_empty:
        return {}
    msg = Message(plain_new=bool(diff.added), plain_del=bool(diff.removed))
    return {w: msg for w in st.nbrs}


def clique_absorb(st: NodeState, diff: AdjacencyDiff, inbox: Inbox) -> None:
    """Fold flags plus the local diff into the triangle listings.

    Locally lost neighbors kill every triangle that used them.  A single
    gained neighbor u combined with a NEW flag from a surviving neighbor
    v pins the new triangle {u, v, self}.  DELETE flags are only treated
    as an edge-deletion witness when this node lost nobody itself: a node
    that saw its own loss attributes every incoming DELETE to that loss.
    """
    _require_single_change(st, diff)
    for u in diff.removed:
        st.stop_triangles_with(u)
    if len(diff.added) == 1:
        (u,) = diff.added
        for v in sorted(inbox):
            if inbox[v].plain_new and v != u and v in st.nbrs:
                st.start_triangle(u, v)
    if not diff.removed:
        del_senders = sorted(v for v in inbox if inbox[v].plain_del)
        if len(del_senders) == 2:
            a, b = del_senders
            st.stop_triangle(frozenset((a, st.self_id, b)))


def _require_single_change(st: NodeState, diff: AdjacencyDiff) -> None:
    inserted_self = diff.added and diff.added == frozenset(st.nbrs) and not diff.removed
    if inserted_self:
        return
    if len(diff.added) + len(diff.removed) > 1:
        raise ProtocolError(
            f"node {st.self_id} got a batch diff (+{sorted(diff.added)} -{sorted(diff.removed)}) "
            "under a single-update protocol")


# ---- wedge protocol (single update per round, carries one ID) ---------


def wedge_emit(st: NodeState, diff: AdjacencyDiff) -> Outbox:
    """Announce the gained or lost neighbor's ID to every current neighbor."""
    if len(diff.added) + len(diff.removed) > 1:
        raise ProtocolError(
            f"node {st.self_id} got a batch diff under the wedge protocol")
    if diff.is_empty:
        return {}
    msg = Message(new_ids=diff.added, del_ids=diff.removed)
    return {w: msg for w in st.nbrs}


def wedge_absorb(st: NodeState, diff: AdjacencyDiff, inbox: Inbox) -> None:
    """All wedge/triangle transitions for one round.

    Local rules run first.  Gaining u closes every listed wedge whose
    endpoints are {self, u} into a triangle.  Losing u downgrades every
    listed triangle {self, x, u} to the wedge centered at x and kills
    every listed wedge that used the edge {self, u} (centered at self
    with endpoint u, or centered at u).

    Message rules then run per sender s.  (NEW, d): if d is unknown to
    this node's adjacency, a fresh wedge (self, s, d) centered at s is
    listed; a listed self-centered wedge with endpoints {s, d} closes to
    the triangle.  (DELETE, d): the s-centered wedge with endpoints
    {self, d} dies; a listed triangle {self, s, d} downgrades to the
    self-centered wedge with endpoints {s, d}.
    """
    me = st.self_id
    for u in sorted(diff.added):
        hits = sorted((w for w in st.wedges if w[1] == frozenset((me, u))), key=lambda w: w[0])
        for center, _ in hits:
            st.stop_wedge(center, me, u)
            st.start_triangle(center, u)
    for u in sorted(diff.removed):
        downs = sorted((t for t in st.tri if u in t), key=sorted)
        for t in downs:
            (x,) = t - {me, u}
            st.stop_triangle(t)
            st.start_wedge(x, me, u)
        dead = [w for w in st.wedges if (w[0] == me and u in w[1]) or w[0] == u]
        if dead:
            st.wedges.difference_update(dead)
            st._cache.clear()

    for s in sorted(inbox):
        m = inbox[s]
        for d in sorted(m.new_ids):
            if d == me:
                continue
            if d not in st.nbrs:
                st.start_wedge(s, me, d)
            if st.has_wedge(me, s, d):
                st.stop_wedge(me, s, d)
                st.start_triangle(s, d)
        for d in sorted(m.del_ids):
            if d == me:
                continue
            st.stop_wedge(s, me, d)
            t = frozenset((me, s, d))
            if t in st.tri:
                st.stop_triangle(t)
                st.start_wedge(me, s, d)


# ---- batched triangle protocol (ID sets, incidence-bounded rounds) ----


def batched_triangle_emit(st: NodeState, diff: AdjacencyDiff) -> Outbox:
    """Send the full diff — gained IDs and lost IDs — to every current
    neighbor as one concatenated message.  A node inserted this round
    thereby floods its entire adjacency list."""
    if diff.is_empty:
        return {}
    msg = Message(new_ids=diff.added, del_ids=diff.removed)
    return {w: msg for w in st.nbrs}


def batched_triangle_absorb(st: NodeState, diff: AdjacencyDiff, inbox: Inbox) -> None:
    """Triangle bookkeeping from ID-carrying announcements.

    Local losses kill every triangle that used the lost neighbor.  A
    DELETE naming d from sender s kills the listed triangle {d, s, self}.
    A NEW naming d from sender s starts {d, s, self} when d is currently
    adjacent to this node; no disambiguation is needed because deletions
    carry IDs.
    """
    me = st.self_id
    for u in sorted(diff.removed):
        st.stop_triangles_with(u)
    for s in sorted(inbox):
        for d in sorted(inbox[s].del_ids):
            if d != me:
                st.stop_triangle(frozenset((d, s, me)))
    for s in sorted(inbox):
        for d in sorted(inbox[s].new_ids):
            if d != me and d != s and d in st.nbrs:
                st.start_triangle(s, d)


def batched_clique_round(st: NodeState, diff: AdjacencyDiff, inbox: Inbox,
                         p: CliqueParams) -> frozenset[frozenset[NodeId]]:
    """One round of the batched clique protocol at a node: triangle
    bookkeeping first, then the clique listing derived from it."""
    batched_triangle_absorb(st, diff, inbox)
    return derive_cliques(st, p)


# ---- protocol registry -------------------------------------------------


@dataclass(frozen=True)
class Protocol:
    """A listing protocol: its node-local rules plus the update regime it
    is defined for and the message bound it promises."""

    name: str
    emit: Callable[[NodeState, AdjacencyDiff], Outbox]
    absorb: Callable[[NodeState, AdjacencyDiff, Inbox], None]
    allowed: frozenset[str]
    single_update: bool
    flag_messages: bool
    lists_wedges: bool
    derives_cliques: bool

    def profile(self, c: int) -> LegalityProfile:
        return LegalityProfile(
            allowed=self.allowed,
            single_update=self.single_update,
            incidence_bound=None if self.single_update else c,
        )

    def bound_bits(self, enc: EncodingParams, c: int) -> int:
        """Per-message bit budget this protocol must never exceed."""
        if self.flag_messages:
            return 2
        if self.single_update:
            return 2 + 2 * enc.count_bits + enc.id_bits
        return 2 + 2 * enc.count_bits + 2 * c * enc.id_bits


PROTOCOLS: dict[str, Protocol] = {
    "clique": Protocol(
        name="clique",
        emit=clique_emit,
        absorb=clique_absorb,
        allowed=frozenset(("insert_node", "delete_node", "delete_edge")),
        single_update=True,
        flag_messages=True,
        lists_wedges=False,
        derives_cliques=True,
    ),
    "wedge": Protocol(
        name="wedge",
        emit=wedge_emit,
        absorb=wedge_absorb,
        allowed=frozenset(("insert_edge", "delete_edge", "delete_node")),
        single_update=True,
        flag_messages=False,
        lists_wedges=True,
        derives_cliques=False,
    ),
    "batched_triangle": Protocol(
        name="batched_triangle",
        emit=batched_triangle_emit,
        absorb=batched_triangle_absorb,
        allowed=frozenset(ALL_UPDATE_KINDS),
        single_update=False,
        flag_messages=False,
        lists_wedges=False,
        derives_cliques=False,
    ),
    "batched_clique": Protocol(
        name="batched_clique",
        emit=batched_triangle_emit,
        absorb=batched_triangle_absorb,
        allowed=frozenset(("insert_node", "delete_node", "delete_edge")),
        single_update=False,
        flag_messages=False,
        lists_wedges=False,
        derives_cliques=True,
    ),
}


def resolve_protocol(proto: Protocol | str) -> Protocol:
    if isinstance(proto, Protocol):
        return proto
    try:
        return PROTOCOLS[proto]
    except KeyError:
        raise ValueError(f"unknown protocol {proto!r}; expected one of {sorted(PROTOCOLS)}") from None
