"""Dynamic undirected graph plus the update vocabulary for one round.

The ground truth topology is a plain adjacency-set graph.  A round of
changes is validated as a whole before it is applied: the updates inside
a round must form a conflict-free set (no edge is referenced twice, no
node is both created and referenced by another change), which is what
makes application order-independent.  Node IDs are bare non-negative
integers; the bit width they are metered at is a property of the
encoding, not of the graph.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import ClassVar, Iterable, Iterator, Union

NodeId = int


class Graph:
    """Undirected simple graph over integer node IDs.

    Invariants (kept by construction, checkable via
    :meth:`invariant_violations`): adjacency is symmetric, there are no
    self loops, and the adjacency map's key set is exactly the node set.
    """

    __slots__ = ("_adj",)

    def __init__(self, nodes: Iterable[NodeId] = (), edges: Iterable[tuple[NodeId, NodeId]] = ()):
        self._adj: dict[NodeId, set[NodeId]] = {v: set() for v in nodes}
        for u, v in edges:
            self.add_edge(u, v)

    # ---- queries -----------------------------------------------------

    @property
    def nodes(self):
        return self._adj.keys()

    @property
    def n(self) -> int:
        return len(self._adj)

    def has_node(self, v: NodeId) -> bool:
        return v in self._adj

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        nbrs = self._adj.get(u)
        return nbrs is not None and v in nbrs

    def neighbors(self, v: NodeId) -> set[NodeId]:
        """Live neighbor set of *v*. Callers must not mutate it."""
        return self._adj[v]

    def degree(self, v: NodeId) -> int:
        return len(self._adj[v])

    def edges(self) -> Iterator[tuple[NodeId, NodeId]]:
        """Each edge once, as an ordered (lo, hi) pair."""
        for u, nbrs in self._adj.items():
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def edge_count(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    # ---- mutation ----------------------------------------------------

    def add_node(self, v: NodeId) -> None:
        if v in self._adj:
            raise ValueError(f"node {v} already present")
        self._adj[v] = set()

    def remove_node(self, v: NodeId) -> None:
        for w in self._adj.pop(v):
            self._adj[w].discard(v)

    def add_edge(self, u: NodeId, v: NodeId) -> None:
        if u == v:
            raise ValueError(f"self loop at {u}")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def remove_edge(self, u: NodeId, v: NodeId) -> None:
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def copy(self) -> "Graph":
        g = Graph()
        g._adj = {v: set(nbrs) for v, nbrs in self._adj.items()}
        return g

    # ---- checks ------------------------------------------------------

    def invariant_violations(self) -> list[str]:
        out = []
        for v, nbrs in self._adj.items():
            if v in nbrs:
                out.append(f"self loop at {v}")
            for w in nbrs:
                if w not in self._adj:
                    out.append(f"edge {{{v},{w}}} dangles: {w} is not a node")
                elif v not in self._adj[w]:
                    out.append(f"edge {{{v},{w}}} is not symmetric")
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(nodes={sorted(self._adj)}, edges={sorted(self.edges())})"


# ---- updates ---------------------------------------------------------


@dataclass(frozen=True)
class InsertNode:
    """A node joins, together with all of its initial edges."""

    kind: ClassVar[str] = "insert_node"
    node: NodeId
    nbrs: frozenset[NodeId]

    def __post_init__(self):
        object.__setattr__(self, "nbrs", frozenset(self.nbrs))


@dataclass(frozen=True)
class DeleteNode:
    kind: ClassVar[str] = "delete_node"
    node: NodeId


@dataclass(frozen=True)
class InsertEdge:
    kind: ClassVar[str] = "insert_edge"
    u: NodeId
    v: NodeId

    def __post_init__(self):
        lo, hi = sorted((self.u, self.v))
        object.__setattr__(self, "u", lo)
        object.__setattr__(self, "v", hi)

    @property
    def edge(self) -> frozenset[NodeId]:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class DeleteEdge:
    kind: ClassVar[str] = "delete_edge"
    u: NodeId
    v: NodeId

    def __post_init__(self):
        lo, hi = sorted((self.u, self.v))
        object.__setattr__(self, "u", lo)
        object.__setattr__(self, "v", hi)

    @property
    def edge(self) -> frozenset[NodeId]:
        return frozenset((self.u, self.v))


Update = Union[InsertNode, DeleteNode, InsertEdge, DeleteEdge]

ALL_UPDATE_KINDS = ("insert_node", "delete_node", "insert_edge", "delete_edge")


@dataclass(frozen=True)
class LegalityProfile:
    """What a protocol accepts per round: variants plus a batching regime.

    ``incidence_bound`` is the per-node cap on edge endpoints touched by
    the round's updates; it only applies when ``single_update`` is off.
    """

    allowed: frozenset[str]
    single_update: bool
    incidence_bound: int | None = None


@dataclass(frozen=True)
class RoundUpdates:
    updates: tuple[Update, ...]
    profile: LegalityProfile

    def __post_init__(self):
        object.__setattr__(self, "updates", tuple(self.updates))


@dataclass(frozen=True)
class AdjacencyDiff:
    """Per-node view of one round: neighbors gained and neighbors lost."""

    added: frozenset[NodeId] = frozenset()
    removed: frozenset[NodeId] = frozenset()

    @property
    def is_empty(self) -> bool:
        return not self.added and not self.removed


EMPTY_DIFF = AdjacencyDiff()


# ---- validation ------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str
    update: Update | None = None

    def __str__(self) -> str:
        if self.update is None:
            return f"{self.rule}: {self.detail}"
        return f"{self.rule}: {self.detail} ({self.update})"


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def message(self) -> str:
        return "; ".join(str(v) for v in self.violations)


class RoundValidationError(Exception):
    """A round was rejected; carries the violations and, when known, the
    index of the offending round."""

    def __init__(self, result: ValidationResult, round_index: int | None = None):
        self.result = result
        self.round_index = round_index
        where = "round" if round_index is None else f"round {round_index}"
        super().__init__(f"invalid {where}: {result.message()}")


def validate_round(g: Graph, r: RoundUpdates) -> ValidationResult:
    """Check one round of updates against the graph and the profile.

    Every violation names the offending update and the rule it broke, so
    callers can surface precise diagnostics.
    """
    res = ValidationResult()
    bad = res.violations
    profile = r.profile

    if profile.single_update and len(r.updates) > 1:
        bad.append(Violation("too many updates", f"{len(r.updates)} updates in a single-update round"))

    inserted: dict[NodeId, InsertNode] = {}
    deleted: set[NodeId] = set()
    for u in r.updates:
        if u.kind not in profile.allowed:
            bad.append(Violation("variant not allowed", f"{u.kind} is outside the protocol's profile", u))
        if isinstance(u, InsertNode):
            if u.node in inserted:
                bad.append(Violation("duplicate node reference", f"node {u.node} inserted twice", u))
            inserted[u.node] = u
        elif isinstance(u, DeleteNode):
            if u.node in deleted:
                bad.append(Violation("duplicate node reference", f"node {u.node} deleted twice", u))
            deleted.add(u.node)
    for v in inserted.keys() & deleted:
        bad.append(Violation("insert/delete conflict", f"node {v} both inserted and deleted"))

    # Structural validity of each update against the pre-round graph.
    for u in r.updates:
        if isinstance(u, InsertNode):
            if g.has_node(u.node):
                bad.append(Violation("node exists", f"node {u.node} already in the graph", u))
            for x in sorted(u.nbrs):
                if x == u.node:
                    bad.append(Violation("self loop", f"node {u.node} adjacent to itself", u))
                elif x in inserted:
                    if u.node not in inserted[x].nbrs:
                        bad.append(Violation(
                            "asymmetric insertion adjacency",
                            f"inserted node {u.node} names inserted node {x}, which does not name it back", u))
                elif not g.has_node(x):
                    bad.append(Violation("unknown neighbor", f"neighbor {x} of inserted node {u.node} does not exist", u))
        elif isinstance(u, DeleteNode):
            if not g.has_node(u.node):
                bad.append(Violation("unknown node", f"node {u.node} does not exist", u))
        elif isinstance(u, InsertEdge):
            if u.u == u.v:
                bad.append(Violation("self loop", f"edge {{{u.u},{u.v}}}", u))
            for x in (u.u, u.v):
                if not g.has_node(x):
                    bad.append(Violation("unknown node", f"edge endpoint {x} does not exist", u))
            if g.has_edge(u.u, u.v):
                bad.append(Violation("edge exists", f"edge {{{u.u},{u.v}}} already present", u))
        elif isinstance(u, DeleteEdge):
            for x in (u.u, u.v):
                if not g.has_node(x):
                    bad.append(Violation("unknown node", f"edge endpoint {x} does not exist", u))
            if not g.has_edge(u.u, u.v):
                bad.append(Violation("edge missing", f"edge {{{u.u},{u.v}}} not present", u))

    # A node deleted this round must not be referenced by any other update;
    # mixing its removal with same-round edge work is order-dependent.
    if deleted:
        for u in r.updates:
            if isinstance(u, DeleteNode):
                continue
            refs: set[NodeId]
            if isinstance(u, InsertNode):
                refs = set(u.nbrs) | {u.node}
            else:
                refs = {u.u, u.v}
            for x in sorted(refs & deleted):
                bad.append(Violation("insert/delete conflict", f"update references node {x}, deleted in the same round", u))

    # No edge may be referenced by two updates.  An edge between two nodes
    # inserted in the same round is declared by both sides and counts once.
    edge_refs: Counter[frozenset[NodeId]] = Counter()
    for u in r.updates:
        if isinstance(u, (InsertEdge, DeleteEdge)):
            edge_refs[u.edge] += 1
        elif isinstance(u, InsertNode):
            for x in u.nbrs:
                if x in inserted:
                    if u.node < x or u.node not in inserted[x].nbrs:
                        edge_refs[frozenset((u.node, x))] += 1
                elif x != u.node:
                    edge_refs[frozenset((u.node, x))] += 1
    for e, count in sorted(edge_refs.items(), key=lambda kv: sorted(kv[0])):
        if count > 1:
            bad.append(Violation("duplicate edge reference", f"edge {{{min(e)},{max(e)}}} referenced {count} times"))

    # Batched profiles cap the number of edge endpoints touched per node.
    if not profile.single_update and profile.incidence_bound is not None:
        changed_edges: set[frozenset[NodeId]] = set()
        for u in r.updates:
            if isinstance(u, (InsertEdge, DeleteEdge)):
                changed_edges.add(u.edge)
            elif isinstance(u, InsertNode):
                changed_edges.update(frozenset((u.node, x)) for x in u.nbrs if x != u.node)
            elif isinstance(u, DeleteNode) and g.has_node(u.node):
                changed_edges.update(frozenset((u.node, w)) for w in g.neighbors(u.node))
        incidence: Counter[NodeId] = Counter()
        for e in changed_edges:
            for x in e:
                incidence[x] += 1
        for v in sorted(incidence):
            if incidence[v] > profile.incidence_bound:
                bad.append(Violation(
                    "incidence bound",
                    f"node {v} touched by {incidence[v]} edge changes, bound is {profile.incidence_bound}"))

    return res


# ---- application -----------------------------------------------------


def apply_round(g: Graph, r: RoundUpdates) -> Graph:
    """Apply a validated round as a set and return the new graph.

    Conflict freedom makes the result independent of any sequential
    application order.  Raises :class:`RoundValidationError` on an
    invalid round.
    """
    result = validate_round(g, r)
    if not result.ok:
        raise RoundValidationError(result)

    out = g.copy()
    for u in r.updates:
        if isinstance(u, DeleteNode):
            out.remove_node(u.node)
    for u in r.updates:
        if isinstance(u, DeleteEdge):
            out.remove_edge(u.u, u.v)
    for u in r.updates:
        if isinstance(u, InsertNode):
            out.add_node(u.node)
    for u in r.updates:
        if isinstance(u, InsertNode):
            for x in u.nbrs:
                out.add_edge(u.node, x)
        elif isinstance(u, InsertEdge):
            out.add_edge(u.u, u.v)
    return out


def diff_adjacency(before: Graph, after: Graph, v: NodeId) -> AdjacencyDiff:
    """Neighbors of *v* gained and lost by the round that turned *before*
    into *after*.  A node inserted this round has every neighbor in
    ``added``.  Asking about a node absent from *after* is an error:
    deleted nodes have no diff.
    """
    if not after.has_node(v):
        raise ValueError(f"node {v} is not present after the round")
    na = after.neighbors(v)
    nb = before.neighbors(v) if before.has_node(v) else ()
    return AdjacencyDiff(frozenset(na - set(nb)), frozenset(set(nb) - na))
