import pytest

from triptemp.figures import fig2, fig4
from triptemp.model import (NetworkError, OverflowError64, Schedule, TripNetwork,
                            WeakSchedule, check_int64, durations, is_one_edge, reverse_trip,
                            reweight, schedule_to_temporalisation, strongly_connected,
                            symmetric_pairing, trip_duration, validate_network)


def test_fig2_is_valid():
    net = fig2()
    assert validate_network(net) == []
    assert net.trip_nodes(1) == [1, 2, 5, 6, 1]
    assert durations(net) == [5, 4, 4]
    assert trip_duration(net, 0) == 5


@pytest.mark.parametrize("edges,trips,needle", [
    ([(0, 1, 1)], [[0, 0]], "walk broken"),
    ([(0, 1, 0)], [[0]], "weight"),
    ([(0, 5, 1)], [[0]], "out of range"),
    ([(0, 1, 1), (1, 0, 1)], [[0]], "not covered"),
    ([(0, 1, 1)], [[]], "empty"),
    ([(0, 1, 1)], [[3]], "unknown edge"),
])
def test_validate_reports_problems(edges, trips, needle):
    net = TripNetwork.build(2, edges, trips)
    assert any(needle in p for p in validate_network(net))


def test_uncovered_node_reported():
    net = TripNetwork.build(3, [(0, 1, 1)], [[0]])
    assert any("node 2" in p for p in validate_network(net))


def test_reverse_trip_and_index_error():
    net = fig2()
    assert reverse_trip(net, 2) == [7, 6, 5, 4]
    with pytest.raises(IndexError):
        trip_duration(net, 3)


def test_schedule_to_temporalisation():
    net = fig2()
    assert schedule_to_temporalisation(net, Schedule((0, 1, 2))).starts == (0, 5, 9)
    assert schedule_to_temporalisation(net, Schedule((2, 1, 0))).starts == (8, 4, 0)
    weak = WeakSchedule(((1, 2), (0,)))
    assert schedule_to_temporalisation(net, weak).starts == (4, 0, 0)


@pytest.mark.parametrize("sched", [Schedule((0, 1)), Schedule((0, 0, 1, 2)), Schedule((0, 1, 5)),
                                   WeakSchedule(((0,), (), (1, 2)))])
def test_bad_schedules(sched):
    with pytest.raises(NetworkError):
        schedule_to_temporalisation(fig2(), sched)


def test_int64_guard():
    assert check_int64(2**63 - 1) == 2**63 - 1
    with pytest.raises(OverflowError64):
        check_int64(2**63)
    net = TripNetwork.build(2, [(0, 1, 2**62), (1, 0, 2**62)], [[0], [1]])
    with pytest.raises(OverflowError64):
        schedule_to_temporalisation(net, Schedule((0, 1)))


def test_symmetric_pairing():
    assert not symmetric_pairing(fig2())
    net = TripNetwork.build(3, [(0, 1, 1), (1, 2, 1), (2, 1, 1), (1, 0, 1)],
                            [[0, 1], [2, 3]])
    p = symmetric_pairing(net)
    assert p and p.pairs == ((0, 1),)
    # a palindrome needs a second copy of itself
    pal = TripNetwork.build(2, [(0, 1, 1), (1, 0, 1)], [[0, 1]])
    assert not symmetric_pairing(pal)
    assert symmetric_pairing(TripNetwork.build(2, pal.edges, [[0, 1], [0, 1]]))


def test_symmetric_pairing_checks_weights():
    net = TripNetwork.build(2, [(0, 1, 1), (1, 0, 2)], [[0], [1]])
    assert not symmetric_pairing(net)


def test_strong_connectivity_and_one_edge():
    assert not strongly_connected(fig2())
    ring = TripNetwork.build(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)], [[0], [1], [2]])
    assert strongly_connected(ring) and is_one_edge(ring)
    assert not is_one_edge(fig4())


def test_reweight():
    net = reweight(fig4(), [2, 3, 4, 5])
    assert [e.weight for e in net.edges] == [2, 3, 4, 5]
    with pytest.raises(NetworkError):
        reweight(fig4(), [1, 1, 1])
    with pytest.raises(NetworkError):
        reweight(fig4(), [1, 0, 1, 1])


def test_node_labels():
    net = fig2()
    assert net.label(4) == "v5" and net.node_index("v8") == 7
    assert TripNetwork.build(2, [(0, 1, 1)], [[0]]).label(1) == "1"
