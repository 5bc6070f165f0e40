"""Small hand-drawn networks used as worked examples and test fixtures."""
from __future__ import annotations

from .model import TripNetwork


def _labels(n: int) -> list[str]:
    return [f"v{i}" for i in range(1, n + 1)]


def fig2() -> TripNetwork:
    """Eight nodes, nine edges, three trips; two parallel v2->v3 edges."""
    edges = [
        (0, 1, 1),  # e0 v1->v2   T1
        (1, 2, 2),  # e1 v2->v3   T1
        (2, 3, 2),  # e2 v3->v4   T1
        (1, 2, 1),  # e3 v2->v3   T2
        (2, 5, 1),  # e4 v3->v6   T2
        (5, 6, 1),  # e5 v6->v7   T2 and T3
        (6, 1, 1),  # e6 v7->v2   T2
        (4, 5, 1),  # e7 v5->v6   T3
        (6, 7, 2),  # e8 v7->v8   T3
    ]
    trips = [[0, 1, 2], [3, 4, 5, 6], [7, 5, 8]]
    return TripNetwork.build(8, edges, trips, _labels(8))


def fig4() -> TripNetwork:
    edges = [(0, 2, 1), (2, 4, 1), (1, 2, 1), (2, 3, 1)]
    trips = [[0, 1], [2, 3]]
    return TripNetwork.build(5, edges, trips, _labels(5))


def fig5(weighted: bool = False) -> TripNetwork:
    """Ten nodes, three trips.  ``weighted`` puts weight 3 on (v4, v5)."""
    v = lambda i: i - 1  # noqa: E731
    edges = [
        (v(1), v(4)), (v(4), v(6)), (v(6), v(9)),                  # T1
        (v(3), v(6)), (v(6), v(10)), (v(10), v(5)), (v(5), v(7)),  # T2
        (v(2), v(4)), (v(4), v(5)), (v(5), v(8)),                  # T3
    ]
    w = [1] * len(edges)
    if weighted:
        w[8] = 3
    trips = [[0, 1, 2], [3, 4, 5, 6], [7, 8, 9]]
    return TripNetwork.build(10, [(a, b, x) for (a, b), x in zip(edges, w)], trips, _labels(10))
