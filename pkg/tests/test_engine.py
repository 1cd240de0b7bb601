from itertools import combinations

import pytest

from dynlist.engine import NetworkState, SimParams, run_round, run_scenario
from dynlist.graph import (
    DeleteEdge,
    DeleteNode,
    Graph,
    InsertEdge,
    InsertNode,
    RoundUpdates,
    RoundValidationError,
)
from dynlist.protocols import PROTOCOLS
from dynlist.scenario_io import dumps_trace


def rounds_for(proto, c, *update_lists):
    profile = PROTOCOLS[proto].profile(c)
    return [RoundUpdates(tuple(us), profile) for us in update_lists]


def test_node_insertion_completes_triangle():
    g = Graph([1, 2], [(1, 2)])
    (r,) = rounds_for("clique", 4, [InsertNode(3, frozenset((1, 2)))])
    trace = run_scenario(g, [r], "clique", SimParams(s=3))
    rep = trace.reports[1]
    t = frozenset((1, 2, 3))
    assert t in rep.listings[1].triangles
    assert t in rep.listings[2].triangles
    assert rep.max_message_bits == 2
    assert rep.messages_sent == 6
    assert rep.verdict.passed


def test_empty_round_is_silent():
    g = Graph([1, 2, 3], [(1, 2), (1, 3), (2, 3)])
    (r,) = rounds_for("clique", 4, [])
    trace = run_scenario(g, [r], "clique", SimParams(s=3))
    rep = trace.reports[1]
    assert rep.messages_sent == 0
    assert rep.max_message_bits == 0
    assert rep.listings == trace.reports[0].listings


def test_initial_k4_snapshot():
    nodes = [1, 2, 3, 4]
    g = Graph(nodes, list(combinations(nodes, 2)))
    trace = run_scenario(g, [], "clique", SimParams(s=4))
    rep = trace.reports[0]
    for v in nodes:
        assert len(rep.listings[v].triangles) == 3
        assert rep.listings[v].cliques == frozenset({frozenset(nodes)})
    assert rep.verdict.passed


def test_earliest_node_lists_triangle_built_by_insertions():
    rounds = rounds_for(
        "clique", 4,
        [InsertNode(1, frozenset())],
        [InsertNode(2, frozenset((1,)))],
        [InsertNode(3, frozenset((1, 2)))],
    )
    trace = run_scenario(Graph(), rounds, "clique", SimParams(s=3))
    final = trace.reports[-1]
    assert frozenset((1, 2, 3)) in final.listings[1].triangles
    assert trace.all_pass


def test_deleted_node_is_dropped_and_silent():
    g = Graph([1, 2, 3], [(1, 2), (1, 3), (2, 3)])
    (r,) = rounds_for("clique", 4, [DeleteNode(3)])
    trace = run_scenario(g, [r], "clique", SimParams(s=3))
    rep = trace.reports[1]
    assert 3 not in rep.listings
    # only 1 and 2 exchange DELETE flags; nothing from or to node 3
    assert rep.messages_sent == 2
    assert rep.verdict.passed


def test_messages_only_over_surviving_links():
    # deleting the middle of a path leaves no link, hence no message
    g = Graph([1, 2, 3], [(1, 2), (2, 3)])
    (r,) = rounds_for("clique", 4, [DeleteNode(2)])
    trace = run_scenario(g, [r], "clique", SimParams(s=3))
    assert trace.reports[1].messages_sent == 0


def test_trace_is_deterministic():
    g = Graph([1, 2], [(1, 2)])
    rounds = rounds_for(
        "clique", 4,
        [InsertNode(3, frozenset((1, 2)))],
        [DeleteEdge(1, 2)],
        [InsertNode(4, frozenset((1, 3)))],
    )
    a = dumps_trace(run_scenario(g, rounds, "clique", SimParams(s=3)))
    b = dumps_trace(run_scenario(g, rounds, "clique", SimParams(s=3)))
    assert a == b


def test_invalid_round_reports_index_and_rule():
    g = Graph([1, 2], [(1, 2)])
    rounds = rounds_for("clique", 4, [], [InsertEdge(1, 2)])
    with pytest.raises(RoundValidationError) as err:
        run_scenario(g, rounds, "clique", SimParams())
    assert err.value.round_index == 2
    assert "variant not allowed" in str(err.value)


def test_id_width_is_enforced():
    g = Graph([1, 2], [(1, 2)])
    small = SimParams(s=3, c=4)
    big_id = 1 << small.encoding.id_bits
    with pytest.raises(ValueError):
        run_scenario(Graph([big_id]), [], "clique", small)
    (r,) = rounds_for("clique", 4, [InsertNode(big_id, frozenset((1,)))])
    with pytest.raises(ValueError):
        run_scenario(g, [r], "clique", small)


def test_wedge_scenario_round_trip():
    g = Graph([1, 2, 3], [(1, 2), (2, 3)])
    rounds = rounds_for("wedge", 4, [InsertEdge(1, 3)], [DeleteEdge(1, 3)])
    trace = run_scenario(g, rounds, "wedge", SimParams())
    assert trace.all_pass
    assert trace.reports[1].listings[2].triangles == frozenset({frozenset((1, 2, 3))})
    assert (2, frozenset((1, 3))) in trace.reports[2].listings[2].wedges


def test_batched_round_report():
    g = Graph([4, 7], [(4, 7)])
    (r,) = rounds_for("batched_triangle", 4, [InsertNode(9, frozenset((4, 7)))])
    trace = run_scenario(g, [r], "batched_triangle", SimParams(c=4))
    rep = trace.reports[1]
    t = frozenset((4, 7, 9))
    assert t in rep.listings[4].triangles and t in rep.listings[7].triangles
    assert rep.verdict.passed


def test_two_flag_ambiguity_is_sound_but_lossy():
    """Documented protocol limitation: an observer cannot distinguish an
    edge deletion between two neighbors from the deletion of a hidden
    common neighbor of theirs, so deleting well-placed decoys strips the
    listers of an intact triangle one by one.  Soundness always holds;
    completeness is eventually lost.  See README, 'Known limitation'.
    """
    g = Graph(
        [1, 2, 3, 4, 6, 7],
        [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (1, 6), (3, 6), (1, 7), (2, 7)],
    )
    rounds = rounds_for("clique", 4, [DeleteNode(4)], [DeleteNode(6)], [DeleteNode(7)])
    trace = run_scenario(g, rounds, "clique", SimParams(s=3))
    target = frozenset((1, 2, 3))
    listers = [
        sorted(v for v in (1, 2, 3) if target in rep.listings[v].triangles)
        for rep in trace.reports
    ]
    assert listers == [[1, 2, 3], [2, 3], [3], []]
    assert all(rep.verdict.sound for rep in trace.reports)
    assert not trace.reports[3].verdict.complete


def test_run_round_requires_matching_profile():
    g = Graph([1, 2], [(1, 2)])
    net = NetworkState.from_initial(g, "clique", SimParams(s=3))
    wrong = RoundUpdates((InsertEdge(1, 2),), PROTOCOLS["batched_triangle"].profile(4))
    # the engine re-validates against its own profile, not the round's
    with pytest.raises(RoundValidationError):
        run_round(net, wrong, 1)
