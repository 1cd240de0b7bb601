import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynlist.graph import (
    AdjacencyDiff,
    DeleteEdge,
    DeleteNode,
    Graph,
    InsertEdge,
    InsertNode,
    RoundUpdates,
    RoundValidationError,
    apply_round,
    diff_adjacency,
    validate_round,
)
from dynlist.protocols import PROTOCOLS
from dynlist.workload import GenParams, gen_scenario

from naive_oracles import apply_updates_sequentially

BATCHED = PROTOCOLS["batched_triangle"].profile(4)
BATCHED_C2 = PROTOCOLS["batched_triangle"].profile(2)
CLIQUE = PROTOCOLS["clique"].profile(4)


def rules(result):
    return [v.rule for v in result.violations]


def test_insert_into_empty():
    g = Graph()
    out = apply_round(g, RoundUpdates((InsertNode(1, frozenset()),), CLIQUE))
    assert sorted(out.nodes) == [1]
    assert out.edge_count() == 0


def test_delete_node_from_triangle():
    g = Graph([1, 2, 3], [(1, 2), (1, 3), (2, 3)])
    out = apply_round(g, RoundUpdates((DeleteNode(3),), CLIQUE))
    assert sorted(out.nodes) == [1, 2]
    assert sorted(out.edges()) == [(1, 2)]


def test_batched_apply_mixed_round():
    g = Graph([1, 2, 3], [(1, 2), (2, 3)])
    r = RoundUpdates((InsertEdge(1, 3), InsertNode(4, frozenset((2,)))), BATCHED_C2)
    out = apply_round(g, r)
    assert sorted(out.edges()) == [(1, 2), (1, 3), (2, 3), (2, 4)]


def test_variant_not_allowed_for_clique_profile():
    g = Graph([1, 2])
    res = validate_round(g, RoundUpdates((InsertEdge(1, 2),), CLIQUE))
    assert "variant not allowed" in rules(res)


def test_incidence_bound_violation():
    g = Graph([1, 2, 3, 5], [(5, 1), (5, 2), (5, 3)])
    r = RoundUpdates((DeleteEdge(5, 1), DeleteEdge(5, 2), DeleteEdge(5, 3)), BATCHED_C2)
    res = validate_round(g, r)
    assert "incidence bound" in rules(res)


def test_duplicate_edge_reference():
    g = Graph([1, 2], [(1, 2)])
    r = RoundUpdates((DeleteEdge(1, 2), DeleteEdge(1, 2)), BATCHED)
    assert "duplicate edge reference" in rules(validate_round(g, r))


def test_single_update_profile_rejects_batch():
    g = Graph([1, 2, 3], [(1, 2), (2, 3)])
    r = RoundUpdates((DeleteEdge(1, 2), DeleteEdge(2, 3)), CLIQUE)
    assert "too many updates" in rules(validate_round(g, r))


def test_structural_violations():
    g = Graph([1, 2, 3], [(1, 2)])
    checks = [
        (InsertNode(1, frozenset()), "node exists"),
        (InsertNode(9, frozenset((42,))), "unknown neighbor"),
        (InsertNode(9, frozenset((9,))), "self loop"),
        (DeleteNode(42), "unknown node"),
        (InsertEdge(1, 2), "edge exists"),
        (DeleteEdge(1, 3), "edge missing"),
        (DeleteEdge(1, 42), "unknown node"),
    ]
    for update, rule in checks:
        res = validate_round(g, RoundUpdates((update,), BATCHED))
        assert rule in rules(res), f"{update} should violate {rule!r}"


def test_insert_delete_conflicts():
    g = Graph([1, 2, 3], [(1, 2), (2, 3)])
    # same node created and destroyed
    r = RoundUpdates((InsertNode(9, frozenset()), DeleteNode(9)), BATCHED)
    assert "insert/delete conflict" in rules(validate_round(g, r))
    # deleted node referenced by an insertion
    r = RoundUpdates((InsertNode(9, frozenset((3,))), DeleteNode(3)), BATCHED)
    assert "insert/delete conflict" in rules(validate_round(g, r))
    # deleted node referenced by an edge update (order-dependent)
    r = RoundUpdates((DeleteEdge(2, 3), DeleteNode(3)), BATCHED)
    assert "insert/delete conflict" in rules(validate_round(g, r))
    # plain churn at one node is legal
    r = RoundUpdates((InsertEdge(1, 3), DeleteEdge(1, 2)), BATCHED)
    assert validate_round(g, r).ok


def test_mutual_new_node_adjacency():
    g = Graph([1])
    ok = RoundUpdates(
        (InsertNode(8, frozenset((9,))), InsertNode(9, frozenset((8,)))), BATCHED)
    assert validate_round(g, ok).ok
    out = apply_round(g, ok)
    assert out.has_edge(8, 9)
    bad = RoundUpdates(
        (InsertNode(8, frozenset((9,))), InsertNode(9, frozenset())), BATCHED)
    assert "asymmetric insertion adjacency" in rules(validate_round(g, bad))


def test_apply_round_rejects_invalid():
    g = Graph([1, 2])
    with pytest.raises(RoundValidationError) as err:
        apply_round(g, RoundUpdates((DeleteEdge(1, 2),), BATCHED))
    assert "edge missing" in str(err.value)


def test_diff_examples():
    before = Graph([1, 2], [(1, 2)])
    after = Graph([1, 2, 3], [(1, 2), (1, 3)])
    assert diff_adjacency(before, after, 1) == AdjacencyDiff(frozenset((3,)), frozenset())
    tri = Graph([1, 2, 3], [(1, 2), (1, 3), (2, 3)])
    cut = Graph([1, 2, 3], [(1, 3), (2, 3)])
    assert diff_adjacency(tri, cut, 1) == AdjacencyDiff(frozenset(), frozenset((2,)))
    path = Graph([1, 2, 3], [(1, 2), (2, 3)])
    swapped = Graph([1, 2, 4], [(1, 2), (2, 4)])
    assert diff_adjacency(path, swapped, 2) == AdjacencyDiff(frozenset((4,)), frozenset((3,)))
    # inserted node: everything is new
    assert diff_adjacency(before, after, 3) == AdjacencyDiff(frozenset((1,)), frozenset())
    with pytest.raises(ValueError):
        diff_adjacency(tri, cut.copy(), 4)


def test_edge_normalization_and_equality():
    assert InsertEdge(5, 2) == InsertEdge(2, 5)
    assert DeleteEdge(5, 2).edge == frozenset((2, 5))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_apply_round_invariants_and_order_independence(seed):
    p = GenParams(seed=seed, protocol="batched_triangle", n0=6, rounds=5, density=0.4, c=3)
    g0, rounds = gen_scenario(p)
    g = g0
    shuffler = random.Random(seed)
    for r in rounds:
        nxt = apply_round(g, r)
        assert nxt.invariant_violations() == []
        perms = [list(r.updates)]
        for _ in range(3):
            order = list(r.updates)
            shuffler.shuffle(order)
            perms.append(order)
        for order in perms:
            assert apply_updates_sequentially(g, order) == nxt
        for v in nxt.nodes:
            d = diff_adjacency(g, nxt, v)
            assert not (d.added & d.removed)
        g = nxt
