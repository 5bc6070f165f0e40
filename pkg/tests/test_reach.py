import pytest

from triptemp.figures import fig2, fig4
from triptemp.model import Schedule, Temporalisation, TripNetwork, schedule_to_temporalisation
from triptemp.reach import (Evaluator, digraph_reach_count, earliest_arrival,
                            induce_temporal_graph, reach_bits, reach_report, reach_set,
                            static_reach_sets)


def test_induced_edges_fig3():
    g = induce_temporal_graph(fig2(), Temporalisation((1, 6, 10)))
    got = sorted((e.tail, e.head, e.start, e.travel) for e in g.edges)
    assert (0, 1, 1, 1) in got and (1, 2, 2, 2) in got and (2, 3, 4, 2) in got
    assert (4, 5, 10, 1) in got and (6, 7, 12, 2) in got
    assert len(got) == 10


def test_earliest_arrival_waits_are_allowed():
    g = induce_temporal_graph(fig2(), Temporalisation((1, 6, 10)))
    arr = earliest_arrival(g, 0)
    assert arr[1] == 2 and arr[7] == 14 and arr[4] is None


def test_reach_sets_fig3():
    net = fig2()
    tau = Temporalisation((1, 6, 10))
    assert reach_set(net, tau, 6) == [1, 6, 7]
    rep = reach_report(net, tau, want_sets=True)
    assert list(rep.sets[6]) == [1, 6, 7]
    assert rep.total == 32
    assert rep.per_source[3] == 1


def test_same_time_edges_do_not_chain():
    # both edges depart at time 0; the second needs arrival <= 0
    net = TripNetwork.build(3, [(0, 1, 1), (1, 2, 1)], [[0], [1]])
    assert reach_set(net, Temporalisation((0, 0)), 0) == [0, 1]
    assert reach_set(net, Temporalisation((0, 1)), 0) == [0, 1, 2]


def test_zero_wait_connection_allowed():
    net = TripNetwork.build(3, [(0, 1, 2), (1, 2, 1)], [[0], [1]])
    assert reach_set(net, Temporalisation((0, 2)), 0) == [0, 1, 2]
    assert reach_set(net, Temporalisation((0, 1)), 0) == [0, 1]


def test_subtotal_and_json():
    net = fig2()
    rep = reach_report(net, schedule_to_temporalisation(net, Schedule((2, 1, 0))),
                       subtotal_sources=[0, 1, 2, 4, 5, 6])
    doc = rep.to_json()
    assert doc["subtotal"] == 32 and doc["total"] == 34 and "sets" not in doc


def test_evaluator_agrees_with_reference():
    net = fig2()
    ev = Evaluator(net)
    for starts in [(1, 6, 10), (9, 5, 1), (0, 0, 0), (-3, 7, 2)]:
        tau = Temporalisation(starts)
        rep = reach_report(net, tau, want_sets=True)
        assert ev.total(starts) == rep.total
        for s in range(net.node_count):
            assert ev.source_count(starts, s) == len(reach_set(net, tau, s))
            for t in range(net.node_count):
                assert ev.connects(starts, s, t) == (t in rep.sets[s])
        # reach_bits is indexed by target: bit s of bits[t] means s reaches t
        bits = reach_bits(net, tau)
        assert all((bits[t] >> s & 1) == (t in rep.sets[s])
                   for s in range(net.node_count) for t in range(net.node_count))


def test_static_closure():
    # 38 counts the six listed sources, the same convention as the reach table
    rep = digraph_reach_count(fig2(), subtotal_sources=[0, 1, 2, 4, 5, 6])
    assert rep.subtotal == 38 and rep.total == 40
    assert digraph_reach_count(fig4()).total == 13
    assert static_reach_sets(fig4())[0] == [0, 2, 3, 4]


def test_source_out_of_range():
    g = induce_temporal_graph(fig4(), Temporalisation((0, 0)))
    with pytest.raises(IndexError):
        earliest_arrival(g, 9)
