"""Seeded scenario generation plus the hand-built adversarial corpus.

Randomness comes from SplitMix64, pinned here in full so the same seed
produces the same scenario on any platform (and in any reimplementation
of this file format).  Generated rounds are always valid for the target
protocol's profile; the generator re-validates before emitting and gives
up loudly on degenerate parameter combinations instead of looping.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .engine import SimParams, run_scenario
from .graph import (
    DeleteEdge,
    DeleteNode,
    Graph,
    InsertEdge,
    InsertNode,
    NodeId,
    RoundUpdates,
    RoundValidationError,
    Update,
    apply_round,
)
from .protocols import PROTOCOLS, Protocol, resolve_protocol
from .scenario_io import Scenario

_MASK = (1 << 64) - 1


class SplitMix64:
    """The SplitMix64 generator, verbatim: a 64-bit counter hashed through
    two xor-multiply rounds.  Tiny, public, and exactly reproducible."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n

    def chance(self, p: float) -> bool:
        return self.random() < p

    def choice(self, seq):
        return seq[self.randrange(len(seq))]


class GenerationError(Exception):
    """The generator could not produce a valid round within its retry
    budget; the parameters are degenerate for this profile."""


DEFAULT_OP_MIX: dict[str, dict[str, float]] = {
    "clique": {"insert_node": 0.40, "delete_node": 0.20, "delete_edge": 0.40},
    "wedge": {"insert_edge": 0.45, "delete_edge": 0.40, "delete_node": 0.15},
    "batched_triangle": {"insert_node": 0.35, "insert_edge": 0.25,
                         "delete_edge": 0.25, "delete_node": 0.15},
    "batched_clique": {"insert_node": 0.45, "delete_edge": 0.35, "delete_node": 0.20},
}

_RETRY_BUDGET = 64


@dataclass(frozen=True)
class GenParams:
    """Everything a scenario draw depends on.  ``op_mix`` weights must be
    zero (or absent) for variants the protocol forbids; node deletion is
    kept light by default so graphs do not collapse early."""

    seed: int
    protocol: str = "clique"
    n0: int = 10
    rounds: int = 50
    density: float = 0.35
    c: int = 4
    op_mix: dict[str, float] | None = None
    max_round_updates: int | None = None  # batched only; default 3 * n0


def gen_initial_graph(rng: SplitMix64, n0: int, density: float) -> Graph:
    g = Graph(range(n0))
    for u in range(n0):
        for v in range(u + 1, n0):
            if rng.chance(density):
                g.add_edge(u, v)
    return g


def gen_scenario(p: GenParams) -> tuple[Graph, list[RoundUpdates]]:
    """Draw a valid scenario for the protocol's profile.

    IDs are handed out strictly increasing and never reused.  Every
    round is validated (via :func:`apply_round`) before it is emitted.
    """
    proto = resolve_protocol(p.protocol)
    profile = proto.profile(p.c)
    mix = dict(p.op_mix or DEFAULT_OP_MIX[p.protocol])
    for kind, weight in mix.items():
        if weight > 0 and kind not in profile.allowed:
            raise GenerationError(f"op_mix gives weight to {kind}, which {p.protocol} forbids")

    rng = SplitMix64(p.seed)
    g0 = gen_initial_graph(rng, p.n0, p.density)
    g = g0.copy()
    next_id = p.n0
    rounds: list[RoundUpdates] = []
    for _ in range(p.rounds):
        if profile.single_update:
            update, next_id = _draw_single_update(rng, g, mix, p, next_id)
            r = RoundUpdates((update,), profile)
        else:
            updates, next_id = _draw_batched_round(rng, g, mix, p, next_id)
            r = RoundUpdates(tuple(updates), profile)
        try:
            g = apply_round(g, r)  # re-validates; a reject here is a generator bug
        except RoundValidationError as e:
            raise GenerationError(f"generated an invalid round: {e.result.message()}") from None
        rounds.append(r)
    return g0, rounds


def _weighted_kind(rng: SplitMix64, mix: dict[str, float], feasible: list[str]) -> str:
    weights = [(k, mix.get(k, 0.0)) for k in feasible if mix.get(k, 0.0) > 0]
    total = sum(w for _, w in weights)
    if total <= 0:
        raise GenerationError(f"no feasible update variant has weight (feasible: {feasible})")
    x = rng.random() * total
    for k, w in weights:
        x -= w
        if x < 0:
            return k
    return weights[-1][0]


def _absent_pairs(g: Graph) -> list[tuple[NodeId, NodeId]]:
    nodes = sorted(g.nodes)
    out = []
    for i, u in enumerate(nodes):
        nu = g.neighbors(u)
        for v in nodes[i + 1:]:
            if v not in nu:
                out.append((u, v))
    return out


def _draw_single_update(rng: SplitMix64, g: Graph, mix: dict[str, float],
                        p: GenParams, next_id: int) -> tuple[Update, int]:
    for _ in range(_RETRY_BUDGET):
        feasible = []
        if mix.get("insert_node", 0) > 0:
            feasible.append("insert_node")
        if mix.get("insert_edge", 0) > 0 and g.n >= 2 and g.edge_count() < g.n * (g.n - 1) // 2:
            feasible.append("insert_edge")
        if mix.get("delete_edge", 0) > 0 and g.edge_count() > 0:
            feasible.append("delete_edge")
        if mix.get("delete_node", 0) > 0 and g.n > 3:
            feasible.append("delete_node")
        if not feasible:
            raise GenerationError("no feasible update variant for the current graph")
        kind = _weighted_kind(rng, mix, feasible)
        if kind == "insert_node":
            nbrs = frozenset(v for v in sorted(g.nodes) if rng.chance(p.density))
            return InsertNode(next_id, nbrs), next_id + 1
        if kind == "insert_edge":
            pairs = _absent_pairs(g)
            if not pairs:
                continue
            return InsertEdge(*rng.choice(pairs)), next_id
        if kind == "delete_edge":
            return DeleteEdge(*rng.choice(sorted(g.edges()))), next_id
        if kind == "delete_node":
            return DeleteNode(rng.choice(sorted(g.nodes))), next_id
    raise GenerationError("retry budget exhausted drawing a single update")


def _draw_batched_round(rng: SplitMix64, g: Graph, mix: dict[str, float],
                        p: GenParams, next_id: int) -> tuple[list[Update], int]:
    """Greedily pack a conflict-free batch under the incidence bound.

    Book-keeping mirrors the validator: per-node endpoint budgets, the
    set of touched edges, and which nodes were inserted/deleted/referenced
    this round.  Slots that cannot be filled are skipped, so a round may
    come out smaller than its target size (possibly empty).
    """
    c = p.c
    cap = p.max_round_updates if p.max_round_updates is not None else 3 * p.n0
    target = rng.randrange(cap + 1)
    budget: dict[NodeId, int] = {}
    edge_refs: set[frozenset[NodeId]] = set()
    inserted: dict[NodeId, set[NodeId]] = {}  # draft adjacency, mutable until freeze
    deleted: set[NodeId] = set()
    referenced: set[NodeId] = set()
    others: list[Update] = []

    def room(v: NodeId) -> int:
        return c - budget.get(v, 0)

    def spend(v: NodeId, amount: int = 1) -> None:
        budget[v] = budget.get(v, 0) + amount

    for _ in range(target):
        feasible = []
        live = [v for v in sorted(g.nodes) if v not in deleted]
        if mix.get("insert_node", 0) > 0:
            feasible.append("insert_node")
        if mix.get("insert_edge", 0) > 0 and len(live) >= 2:
            feasible.append("insert_edge")
        if mix.get("delete_edge", 0) > 0 and g.edge_count() > 0:
            feasible.append("delete_edge")
        if mix.get("delete_node", 0) > 0 and len(live) > 3:
            feasible.append("delete_node")
        if not feasible:
            break
        kind = _weighted_kind(rng, mix, feasible)

        if kind == "insert_node":
            pool = [v for v in live if room(v) >= 1]
            pool += [v for v in sorted(inserted) if room(v) >= 1]
            want = min(rng.randrange(c + 1), len(pool))
            nbrs: set[NodeId] = set()
            for _ in range(want):
                avail = [v for v in pool if v not in nbrs and room(v) >= 1]
                if not avail:
                    break
                x = rng.choice(avail)
                nbrs.add(x)
                spend(x)
                edge_refs.add(frozenset((next_id, x)))
                if x in inserted:
                    inserted[x].add(next_id)
            spend(next_id, len(nbrs))
            if room(next_id) < 0:
                raise GenerationError("insert_node overdrew its own budget")
            inserted[next_id] = nbrs
            referenced.update(nbrs)
            referenced.add(next_id)
            next_id += 1
            continue

        if kind == "insert_edge":
            found = None
            for _ in range(_RETRY_BUDGET):
                u = rng.choice(live)
                v = rng.choice(live)
                if u == v or g.has_edge(u, v):
                    continue
                e = frozenset((u, v))
                if e in edge_refs or room(u) < 1 or room(v) < 1:
                    continue
                found = (u, v)
                break
            if found is None:
                continue
            u, v = found
            edge_refs.add(frozenset((u, v)))
            spend(u)
            spend(v)
            referenced.update((u, v))
            others.append(InsertEdge(u, v))
            continue

        if kind == "delete_edge":
            candidates = [e for e in sorted(g.edges())
                          if frozenset(e) not in edge_refs
                          and e[0] not in deleted and e[1] not in deleted
                          and room(e[0]) >= 1 and room(e[1]) >= 1]
            if not candidates:
                continue
            u, v = rng.choice(candidates)
            edge_refs.add(frozenset((u, v)))
            spend(u)
            spend(v)
            referenced.update((u, v))
            others.append(DeleteEdge(u, v))
            continue

        if kind == "delete_node":
            candidates = []
            for v in live:
                if v in referenced:
                    continue
                nbrs = g.neighbors(v)
                if len(nbrs) > room(v):
                    continue
                if any(w in deleted or room(w) < 1 for w in nbrs):
                    continue
                if any(frozenset((v, w)) in edge_refs for w in nbrs):
                    continue
                candidates.append(v)
            if not candidates:
                continue
            v = rng.choice(candidates)
            spend(v, len(g.neighbors(v)))
            for w in g.neighbors(v):
                spend(w)
                edge_refs.add(frozenset((v, w)))
            deleted.add(v)
            referenced.add(v)
            continue

    updates = [InsertNode(v, frozenset(nbrs)) for v, nbrs in sorted(inserted.items())]
    updates += others
    updates += [DeleteNode(v) for v in sorted(deleted)]
    return updates, next_id


def make_scenario(p: GenParams, params: SimParams | None = None) -> Scenario:
    g0, rounds = gen_scenario(p)
    sim = params or SimParams(c=p.c)
    return Scenario(p.protocol, sim, g0, rounds)


# ---- adversarial corpus ------------------------------------------------


@dataclass(frozen=True)
class CorpusCase:
    name: str
    scenario: Scenario
    note: str


def _rounds(proto: Protocol, c: int, *update_lists) -> list[RoundUpdates]:
    profile = proto.profile(c)
    return [RoundUpdates(tuple(us), profile) for us in update_lists]


def adversarial_corpus() -> list[CorpusCase]:
    """Hand-built scenarios aimed at the protocols' known tight spots."""
    cases = []

    proto = PROTOCOLS["clique"]
    cases.append(CorpusCase(
        "hub-deletion",
        Scenario("clique", SimParams(s=3),
                 Graph([1, 2, 3, 4], [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]),
                 _rounds(proto, 4, [DeleteNode(4)])),
        "deleting a node adjacent to an intact triangle must not unlist the triangle",
    ))
    cases.append(CorpusCase(
        "rebuild-clique",
        Scenario("clique", SimParams(s=4),
                 Graph([1, 2, 3, 4], [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]),
                 _rounds(proto, 4,
                         [DeleteEdge(3, 4)],
                         [DeleteNode(4)],
                         [InsertNode(5, frozenset((1, 2, 3)))])),
        "a clique destroyed by an edge deletion is rebuilt by delete + reinsert",
    ))
    cases.append(CorpusCase(
        "sequential-k6",
        Scenario("clique", SimParams(s=6),
                 Graph([1]),
                 _rounds(proto, 4,
                         [InsertNode(2, frozenset((1,)))],
                         [InsertNode(3, frozenset((1, 2)))],
                         [InsertNode(4, frozenset((1, 2, 3)))],
                         [InsertNode(5, frozenset((1, 2, 3, 4)))],
                         [InsertNode(6, frozenset((1, 2, 3, 4, 5)))])),
        "each earlier joiner ends up holding the sub-clique of later joiners",
    ))

    bt = PROTOCOLS["batched_triangle"]
    cases.append(CorpusCase(
        "triple-insert",
        Scenario("batched_triangle", SimParams(c=4),
                 Graph([1, 2], [(1, 2)]),
                 _rounds(bt, 4, [
                     InsertNode(3, frozenset((4, 5))),
                     InsertNode(4, frozenset((3, 5))),
                     InsertNode(5, frozenset((3, 4))),
                 ])),
        "three simultaneous joiners forming a triangle all list it",
    ))
    cases.append(CorpusCase(
        "mixed-batch",
        Scenario("batched_triangle", SimParams(c=4),
                 Graph([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4), (1, 3)]),
                 _rounds(bt, 4, [
                     InsertNode(5, frozenset((2, 4))),
                     DeleteEdge(1, 2),
                     InsertEdge(2, 4),
                 ])),
        "one node gains and loses neighbors in the same batch",
    ))

    w = PROTOCOLS["wedge"]
    cases.append(CorpusCase(
        "wedge-flipflop",
        Scenario("wedge", SimParams(),
                 Graph([1, 2, 3], [(1, 2), (2, 3)]),
                 _rounds(w, 4,
                         [InsertEdge(1, 3)],
                         [DeleteEdge(1, 3)],
                         [InsertEdge(1, 3)],
                         [DeleteEdge(1, 3)])),
        "the closing edge repeatedly flips a wedge into a triangle and back",
    ))
    return cases


# ---- fuzzing -----------------------------------------------------------


@dataclass
class FuzzFailure:
    seed: int
    round_index: int
    detail: str


@dataclass
class FuzzSummary:
    protocol: str
    seeds: int
    passed: int
    failures: list[FuzzFailure] = field(default_factory=list)
    max_message_bits: int = 0
    rounds_total: int = 0
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "seeds": self.seeds,
            "passed": self.passed,
            "failed": len(self.failures),
            "max_message_bits": self.max_message_bits,
            "rounds_total": self.rounds_total,
            "elapsed_sec": round(self.elapsed, 3),
            "first_failure": (
                {"seed": self.failures[0].seed,
                 "round": self.failures[0].round_index,
                 "detail": self.failures[0].detail}
                if self.failures else None
            ),
        }


def seeded_n0(seed: int, lo: int = 5, hi: int = 20) -> int:
    """Initial node count derived from the seed, in [lo, hi]."""
    return lo + SplitMix64(seed ^ 0xA5A5_5A5A).randrange(hi - lo + 1)


def run_fuzz(protocol: str, seeds: int, rounds: int, n0: int | None = None,
             density: float = 0.35, c: int = 4, s: int = 4,
             s_values=None, base_seed: int = 0,
             sim: SimParams | None = None) -> FuzzSummary:
    """Run ``seeds`` generated scenarios end to end with verdicts.

    ``n0=None`` draws the initial size per seed from [5, 20].  Every
    failing verdict is recorded with its seed, round, and witnesses.
    """
    summary = FuzzSummary(protocol=protocol, seeds=seeds, passed=0)
    sim = sim or SimParams(s=s, c=c)
    t0 = time.perf_counter()
    for i in range(seeds):
        seed = base_seed + i
        p = GenParams(seed=seed, protocol=protocol,
                      n0=n0 if n0 is not None else seeded_n0(seed),
                      rounds=rounds, density=density, c=c)
        g0, rnds = gen_scenario(p)
        trace = run_scenario(g0, rnds, protocol, sim, verify=True, s_values=s_values)
        summary.rounds_total += len(trace.reports)
        summary.max_message_bits = max(summary.max_message_bits, trace.max_message_bits)
        bad = [r for r in trace.reports if not r.verdict.passed]
        if bad:
            v = bad[0].verdict
            detail = (f"sound={v.sound} complete={v.complete} bandwidth_ok={v.bandwidth_ok} "
                      f"missing={[w for w in v.missing[:3]]} phantom={[w for w in v.phantom[:3]]}")
            summary.failures.append(FuzzFailure(seed, bad[0].round_index, detail))
        else:
            summary.passed += 1
    summary.elapsed = time.perf_counter() - t0
    return summary
