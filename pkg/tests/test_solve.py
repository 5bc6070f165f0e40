import math

import pytest

from triptemp import gen
from triptemp.figures import fig2, fig4
from triptemp.model import Schedule, TripNetwork, WeakSchedule, schedule_to_temporalisation
from triptemp.reach import Evaluator, reach_report
from triptemp.solve import (CapExceeded, Segment, SolveError, Witness,
                            colourings_up_to_relabel, default_trials, exact_best, fpt_o2o,
                            fubini, o2o_oracle, o2o_reachable, one_to_all_schedule,
                            rank_vectors, search_size, strongly_temporalisable_check,
                            symmetric_approx_schedule, transfer_tree, verify_witness,
                            weighted_centroid_partition, witness_to_schedule)


def test_counts():
    assert [fubini(k) for k in range(6)] == [1, 1, 3, 13, 75, 541]
    assert len(list(rank_vectors(4))) == 75
    assert search_size(3, "perm") == 6 and search_size(2, "grid", 4) == 25
    # Stirling sums: colourings of 5 trips with at most 3 colours
    assert len(list(colourings_up_to_relabel(5, 3))) == 1 + 15 + 25
    assert default_trials(3) == math.ceil(math.e ** 3 * math.log(100))


def test_exact_fig4():
    net = fig4()
    assert exact_best(net, "perm").value == 12
    r = exact_best(net, "weak")
    assert r.value == 13 and isinstance(r.assignment, WeakSchedule)
    assert exact_best(net, "grid").value == 13


def test_exact_first_in_enumeration_order_and_workers():
    net = fig2()
    one = exact_best(net, "weak", workers=1)
    two = exact_best(net, "weak", workers=2)
    assert one.value == two.value and one.assignment == two.assignment


def test_exact_source_mode():
    net = fig2()
    r = exact_best(net, "perm", source=0)
    assert r.value == 7


def test_cap():
    with pytest.raises(CapExceeded) as exc:
        exact_best(fig2(), "grid", cap=100)
    assert exc.value.required == 27 ** 3


def test_oracle_witness_example():
    r = o2o_oracle(fig2(), 4, 3)
    assert r.feasible
    assert r.witness.segments == (Segment(2, 4, 5), Segment(1, 5, 1), Segment(0, 1, 3))


def test_oracle_infeasible_and_kcap():
    net = fig2()
    assert not o2o_oracle(net, 4, 0)
    assert o2o_oracle(net, 0, 7)
    assert not o2o_oracle(net, 0, 7, k_cap=2)
    assert o2o_reachable(net, 0) == {0, 1, 2, 3, 5, 6, 7}


def test_fpt_modes_agree_fig2():
    net = fig2()
    for k in (1, 2, 3):
        ex = fpt_o2o(net, 0, 7, k, "exhaustive").decision
        assert ex == fpt_o2o(net, 0, 7, k, "oracle").decision == (k == 3)
    r = fpt_o2o(net, 0, 7, 3, "random", seed=1)
    assert r and witness_to_schedule(net, r.witness)


def test_fpt_errors():
    with pytest.raises(SolveError):
        fpt_o2o(fig2(), 0, 7, 0)
    with pytest.raises(SolveError):
        fpt_o2o(fig2(), 0, 7, 4)
    with pytest.raises(CapExceeded):
        fpt_o2o(fig2(), 0, 7, 3, "random", budget=10)


def test_bad_witness_rejected():
    net = fig2()
    with pytest.raises(SolveError):
        verify_witness(net, Witness(0, 7, (Segment(0, 0, 3),)))
    with pytest.raises(SolveError):
        verify_witness(net, Witness(0, 2, (Segment(0, 0, 1), Segment(0, 1, 2))))


def test_one_to_all_matches_closure():
    net = gen.gen_random_symmetric(30, 10, seed=4)
    for u in (0, 7, 29):
        rep = reach_report(net, schedule_to_temporalisation(net, one_to_all_schedule(net, u)))
        assert rep.per_source[u] == 30
        rep = reach_report(net, schedule_to_temporalisation(net, one_to_all_schedule(net, u, "to_u")),
                           want_sets=True)
        assert all(u in s for s in rep.sets)


def test_symmetric_requirements():
    with pytest.raises(SolveError):
        symmetric_approx_schedule(fig2())
    two = TripNetwork.build(4, [(0, 1, 1), (1, 0, 1), (2, 3, 1), (3, 2, 1)], [[0], [1], [2], [3]])
    with pytest.raises(SolveError):
        symmetric_approx_schedule(two)


def test_centroid_partition_bounds():
    for seed in range(30):
        net = gen.gen_random_symmetric(25 + seed, 3 + seed % 11, seed=seed)
        tree = transfer_tree(net)
        part = weighted_centroid_partition(tree)
        K = tree.total
        assert sum(tree.weight) == net.node_count == K
        assert all(3 * w <= 2 * K for w in part.subtree_weight) or part.heavy
        if not part.heavy:
            assert 3 * part.w1 >= K and 3 * part.w2 >= K or len(part.subtrees) == 0
        res = symmetric_approx_schedule(net)
        assert res.report.total >= res.bound


def test_approx_single_pair():
    net = gen.gen_random_symmetric(2, 1, seed=0)
    res = symmetric_approx_schedule(net)
    assert res.report.total == 4
    assert res.report.total >= res.bound


def test_strongly_temporalisable_modes():
    st = strongly_temporalisable_check(fig2())
    assert not st and st.certificate == (4, 0) and st.method == "brute"
    net = gen.gen_random_symmetric(12, 4, seed=2)
    assert strongly_temporalisable_check(net).method == "symmetric"
    assert strongly_temporalisable_check(net, mode="brute").value
    ring = TripNetwork.build(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)], [[0], [1], [2]])
    r = strongly_temporalisable_check(ring)
    assert r and r.method == "one-edge"
