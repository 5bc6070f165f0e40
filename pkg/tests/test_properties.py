import itertools

from _helpers import networks
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from triptemp import gen
from triptemp.model import (Schedule, Temporalisation, durations, reweight,
                            schedule_to_temporalisation)
from triptemp.reach import (earliest_arrival, induce_temporal_graph, reach_report,
                            static_reach_sets)
from triptemp.solve import (exact_best, fpt_o2o, o2o_oracle, o2o_reachable,
                            symmetric_approx_schedule, transfer_tree,
                            weighted_centroid_partition)
from triptemp.verify import verify_instance

FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def _sets(net, tau):
    return [frozenset(s) for s in reach_report(net, tau, want_sets=True).sets]


@FAST
@given(st.data())
def test_schedule_reach_ignores_weights(data):
    net = data.draw(networks())
    order = data.draw(st.permutations(range(net.trip_count)))
    weights = data.draw(st.lists(st.integers(1, 9), min_size=len(net.edges), max_size=len(net.edges)))
    other = reweight(net, weights)
    s = Schedule(tuple(order))
    assert _sets(net, schedule_to_temporalisation(net, s)) == \
        _sets(other, schedule_to_temporalisation(other, s))


@FAST
@given(st.data())
def test_translation_invariance(data):
    net = data.draw(networks())
    starts = data.draw(st.lists(st.integers(0, 12), min_size=net.trip_count, max_size=net.trip_count))
    c = data.draw(st.integers(-50, 50))
    tau = Temporalisation(tuple(starts))
    assert _sets(net, tau) == _sets(net, tau.shifted(c))


@FAST
@given(st.data())
def test_temporal_reach_within_static(data):
    net = data.draw(networks())
    starts = data.draw(st.lists(st.integers(0, 12), min_size=net.trip_count, max_size=net.trip_count))
    static = [set(r) for r in static_reach_sets(net)]
    for u, s in enumerate(_sets(net, Temporalisation(tuple(starts)))):
        assert u in s and s <= static[u]


@FAST
@given(st.data())
def test_evaluator_matches_earliest_arrival(data):
    net = data.draw(networks())
    starts = data.draw(st.lists(st.integers(0, 12), min_size=net.trip_count, max_size=net.trip_count))
    tau = Temporalisation(tuple(starts))
    g = induce_temporal_graph(net, tau)
    sets = _sets(net, tau)
    for u in range(net.node_count):
        arr = earliest_arrival(g, u)
        assert sets[u] == frozenset(v for v, a in enumerate(arr) if a is not None)


@SLOW
@given(networks(max_nodes=5, max_trips=3, max_len=2, max_w=2))
def test_optimum_ordering(net):
    perm = exact_best(net, "perm").value
    weak = exact_best(net, "weak").value
    grid = exact_best(net, "grid", horizon=2 * sum(durations(net))).value
    assert perm <= weak <= grid


@FAST
@given(networks(max_nodes=5, max_trips=4))
def test_oracle_agrees_with_permutations(net):
    n, T = net.node_count, net.trip_count
    hit = [set() for _ in range(n)]
    for order in itertools.permutations(range(T)):
        tau = schedule_to_temporalisation(net, Schedule(order))
        for u, s in enumerate(_sets(net, tau)):
            hit[u] |= s
    for u in range(n):
        assert o2o_reachable(net, u) == hit[u]
        for v in range(n):
            assert bool(o2o_oracle(net, u, v)) == (v in hit[u])


@FAST
@given(st.data())
def test_exhaustive_colouring_agrees_with_oracle(data):
    net = data.draw(networks(max_nodes=5, max_trips=4))
    s, t = data.draw(st.tuples(st.integers(0, net.node_count - 1), st.integers(0, net.node_count - 1)))
    k = data.draw(st.integers(1, net.trip_count))
    ex = fpt_o2o(net, s, t, k, "exhaustive")
    assert ex.decision == o2o_oracle(net, s, t, k_cap=k).feasible
    if ex.decision:
        assert len(set(ex.witness.trips)) <= k


@FAST
@given(st.integers(2, 60), st.integers(1, 15), st.integers(0, 10 ** 6))
def test_centroid_and_approx_bound(n, pairs, seed):
    net = gen.gen_random_symmetric(n, pairs, seed=seed)
    tree = transfer_tree(net)
    part = weighted_centroid_partition(tree)
    K = tree.total
    assert K == n
    if part.heavy:
        assert 3 * tree.weight[part.centroid] >= K
    else:
        assert all(3 * w <= 2 * K for w in part.subtree_weight)
        assert part.w1 + part.w2 == K
        if part.subtrees:
            assert 3 * part.w1 >= K and 3 * part.w2 >= K
    res = symmetric_approx_schedule(net)
    assert res.report.total >= res.bound


@SLOW
@given(st.integers(4, 7), st.integers(0, 10 ** 6))
def test_hard_family_verifies(r, seed):
    net, _ = gen.gen_hard_family(r)
    checks = verify_instance(net, samples=30, seed=seed)
    assert all(c.ok for c in checks)
