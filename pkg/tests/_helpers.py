"""Shared builders for tests: small random networks and the acceptance log."""
from __future__ import annotations

import random
import time

from hypothesis import strategies as st

from triptemp.model import TripNetwork

ACCEPTANCE: list[str] = []


def record(tag: str, ok: bool, detail: str, elapsed: float | None = None,
           budget: float | None = None) -> bool:
    within = budget is None or elapsed is None or elapsed < budget
    verdict = ok and within
    timing = "" if elapsed is None else f" [{elapsed:.2f}s" + (f" < {budget:g}s" if budget else "") + "]"
    line = f"{'PASS' if verdict else 'FAIL'} {tag}: {detail}{timing}"
    ACCEPTANCE.append(line)
    print(line)
    return verdict


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def random_walk(rng: random.Random, n: int, length: int) -> list[int]:
    nodes = [rng.randrange(n)]
    for _ in range(length):
        v = rng.randrange(n - 1)
        nodes.append(v + 1 if v >= nodes[-1] else v)
    return nodes


def network_from_walks(walks, n: int, weights=None, share: bool = True) -> TripNetwork:
    """One trip per walk. With ``share`` equal (u, v) steps reuse one edge."""
    edges, book, trips = [], {}, []
    k = 0
    for w in walks:
        ids = []
        for a, b in zip(w, w[1:]):
            wt = 1 if weights is None else weights[k % len(weights)]
            k += 1
            key = (a, b, wt)
            if share and key in book:
                ids.append(book[key])
            else:
                book[key] = len(edges)
                ids.append(len(edges))
                edges.append(key)
        trips.append(ids)
    return TripNetwork.build(n, edges, trips)


def random_network(rng: random.Random, n: int, trips: int, max_len: int = 3,
                   max_w: int = 1) -> TripNetwork:
    walks = [random_walk(rng, n, rng.randint(1, max_len)) for _ in range(trips)]
    weights = [rng.randint(1, max_w) for _ in range(sum(len(w) - 1 for w in walks))]
    return network_from_walks(walks, n, weights, share=rng.random() < 0.5)


def random_symmetric_walks(rng: random.Random, n: int, pairs: int, max_len: int = 3) -> TripNetwork:
    """Symmetric but not necessarily strongly connected."""
    walks = []
    for _ in range(pairs):
        w = random_walk(rng, n, rng.randint(1, max_len))
        walks += [w, w[::-1]]
    return network_from_walks(walks, n)


@st.composite
def networks(draw, max_nodes: int = 6, max_trips: int = 4, max_len: int = 3, max_w: int = 3):
    n = draw(st.integers(2, max_nodes))
    k = draw(st.integers(1, max_trips))
    walks = []
    for _ in range(k):
        length = draw(st.integers(1, max_len))
        first = draw(st.integers(0, n - 1))
        w = [first]
        for _ in range(length):
            step = draw(st.integers(0, n - 2))
            w.append(step + 1 if step >= w[-1] else step)
        walks.append(w)
    m = sum(len(w) - 1 for w in walks)
    weights = draw(st.lists(st.integers(1, max_w), min_size=m, max_size=m))
    return network_from_walks(walks, n, weights, share=draw(st.booleans()))
