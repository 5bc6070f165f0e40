"""Trip networks, temporalisations and schedules.

A trip network is a directed multigraph with positive integer edge weights
plus a multiset of trips.  Trips reference edges by index so that parallel
edges stay distinct.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)


class NetworkError(ValueError):
    """Structural problem with a network, schedule or assignment."""


class OverflowError64(ArithmeticError):
    pass


def check_int64(x: int) -> int:
    if x > INT64_MAX or x < INT64_MIN:
        raise OverflowError64(f"time value {x} outside signed 64-bit range")
    return x


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    weight: int = 1


@dataclass(frozen=True)
class TripNetwork:
    node_count: int
    edges: tuple[Edge, ...]
    trips: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = None
    meta: dict | None = field(default=None, compare=False, hash=False)

    @classmethod
    def build(cls, node_count: int, edges: Iterable, trips: Iterable[Iterable[int]],
              labels: Sequence[str] | None = None, meta: dict | None = None) -> "TripNetwork":
        es = tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges)
        ts = tuple(tuple(int(i) for i in t) for t in trips)
        return cls(int(node_count), es, ts, tuple(labels) if labels is not None else None, meta)

    @property
    def trip_count(self) -> int:
        return len(self.trips)

    def trip_nodes(self, t: int) -> list[int]:
        """Node sequence visited by trip ``t`` (length = edges + 1)."""
        ids = self.trips[t]
        nodes = [self.edges[ids[0]].tail]
        nodes.extend(self.edges[i].head for i in ids)
        return nodes

    def label(self, v: int) -> str:
        if self.labels is not None:
            return self.labels[v]
        return str(v)

    def node_index(self, label: str) -> int:
        if self.labels is None:
            raise KeyError(label)
        return self.labels.index(label)

    def with_meta(self, meta: dict | None) -> "TripNetwork":
        return TripNetwork(self.node_count, self.edges, self.trips, self.labels, meta)


@dataclass(frozen=True)
class Temporalisation:
    starts: tuple[int, ...]

    @classmethod
    def of(cls, starts: Iterable[int]) -> "Temporalisation":
        return cls(tuple(int(s) for s in starts))

    def shifted(self, c: int) -> "Temporalisation":
        return Temporalisation(tuple(s + c for s in self.starts))


@dataclass(frozen=True)
class Schedule:
    order: tuple[int, ...]

    @classmethod
    def of(cls, order: Iterable[int]) -> "Schedule":
        return cls(tuple(int(i) for i in order))


@dataclass(frozen=True)
class WeakSchedule:
    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]]) -> "WeakSchedule":
        return cls(tuple(tuple(int(i) for i in b) for b in blocks))


@dataclass(frozen=True)
class SymmetricPairing:
    pairs: tuple[tuple[int, int], ...]

    def partner(self) -> dict[int, int]:
        out = {}
        for a, b in self.pairs:
            out[a] = b
            out[b] = a
        return out


@dataclass(frozen=True)
class NotSymmetric:
    witness: int  # a trip left without a reverse partner

    def __bool__(self) -> bool:
        return False


# --------------------------------------------------------------------------
# validation and basic queries

def validate_network(net: TripNetwork) -> list[str]:
    out: list[str] = []
    n = net.node_count
    if n < 0:
        out.append(f"node_count {n} is negative")
    if net.labels is not None and len(net.labels) != n:
        out.append(f"labels: {len(net.labels)} labels for {n} nodes")
    for i, e in enumerate(net.edges):
        if not (0 <= e.tail < n) or not (0 <= e.head < n):
            out.append(f"edge {i}: endpoint out of range ({e.tail}->{e.head}, nodes={n})")
        if not isinstance(e.weight, int) or e.weight < 1:
            out.append(f"edge {i}: weight {e.weight!r} is not a positive integer")
    m = len(net.edges)
    used_edges = [False] * m
    for t, ids in enumerate(net.trips):
        if len(ids) == 0:
            out.append(f"trip {t}: empty")
            continue
        bad = [i for i in ids if not (0 <= i < m)]
        if bad:
            out.append(f"trip {t}: unknown edge indices {bad}")
            continue
        for i in ids:
            used_edges[i] = True
        for pos in range(len(ids) - 1):
            a, b = net.edges[ids[pos]], net.edges[ids[pos + 1]]
            if a.head != b.tail:
                out.append(f"trip {t}: walk broken at position {pos} "
                           f"(edge {ids[pos]} ends at {a.head}, edge {ids[pos + 1]} starts at {b.tail})")
    for i, u in enumerate(used_edges):
        if not u:
            out.append(f"edge {i}: not covered by any trip")
    covered = [False] * max(n, 0)
    for i, e in enumerate(net.edges):
        if used_edges[i]:
            for v in (e.tail, e.head):
                if 0 <= v < n:
                    covered[v] = True
    for v in range(max(n, 0)):
        if not covered[v] and not (n == 1 and not net.edges):
            out.append(f"node {v}: not visited by any trip")
    return out


def _check_trip(net: TripNetwork, t: int) -> None:
    if not (0 <= t < len(net.trips)):
        raise IndexError(f"trip index {t} out of range (0..{len(net.trips) - 1})")


def trip_duration(net: TripNetwork, t: int) -> int:
    _check_trip(net, t)
    return sum(net.edges[i].weight for i in net.trips[t])


def durations(net: TripNetwork) -> list[int]:
    return [sum(net.edges[i].weight for i in ids) for ids in net.trips]


def reverse_trip(net: TripNetwork, t: int) -> list[int]:
    _check_trip(net, t)
    return net.trip_nodes(t)[::-1]


def _trip_key(net: TripNetwork, t: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return tuple(net.trip_nodes(t)), tuple(net.edges[i].weight for i in net.trips[t])


def symmetric_pairing(net: TripNetwork) -> SymmetricPairing | NotSymmetric:
    """Match every trip with a distinct trip walking the same nodes backwards.

    Greedy over trip indices; each trip takes the lowest unmatched index with
    the reversed key.  Weights must agree edge by edge under reversal.
    """
    waiting: dict[tuple, deque[int]] = defaultdict(deque)
    keys = [_trip_key(net, t) for t in range(net.trip_count)]
    for t, k in enumerate(keys):
        waiting[k].append(t)
    matched = [False] * net.trip_count
    pairs = []
    for t, (nodes, ws) in enumerate(keys):
        if matched[t]:
            continue
        rev = (nodes[::-1], ws[::-1])
        q = waiting[rev]
        while q and matched[q[0]]:
            q.popleft()
        # x != t: a palindromic trip needs a second copy, never itself
        partner = next((x for x in q if not matched[x] and x != t), None)
        if partner is None:
            return NotSymmetric(t)
        matched[t] = matched[partner] = True
        pairs.append((t, partner))
    return SymmetricPairing(tuple(pairs))


def schedule_to_temporalisation(net: TripNetwork, s: Schedule | WeakSchedule) -> Temporalisation:
    k = net.trip_count
    dur = durations(net)
    starts = [0] * k
    seen = [False] * k
    if isinstance(s, Schedule):
        blocks: Sequence[Sequence[int]] = [(t,) for t in s.order]
    elif isinstance(s, WeakSchedule):
        blocks = s.blocks
    else:
        raise TypeError(f"expected Schedule or WeakSchedule, got {type(s).__name__}")
    clock = 0
    for b in blocks:
        if not b:
            raise NetworkError("weak schedule has an empty block")
        for t in b:
            if not (0 <= t < k):
                raise NetworkError(f"trip index {t} out of range")
            if seen[t]:
                raise NetworkError(f"trip {t} scheduled twice")
            seen[t] = True
            starts[t] = clock
        clock = check_int64(clock + max(dur[t] for t in b))
    if not all(seen):
        missing = [t for t in range(k) if not seen[t]]
        raise NetworkError(f"trips {missing} not scheduled")
    return Temporalisation(tuple(starts))


def out_adjacency(net: TripNetwork) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(net.node_count)]
    for e in net.edges:
        adj[e.tail].append(e.head)
    return adj


def _bfs_all(adj: list[list[int]], start: int) -> list[bool]:
    seen = [False] * len(adj)
    seen[start] = True
    q = deque([start])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                q.append(v)
    return seen


def strongly_connected(net: TripNetwork) -> bool:
    n = net.node_count
    if n <= 1:
        return True
    fwd = out_adjacency(net)
    bwd: list[list[int]] = [[] for _ in range(n)]
    for e in net.edges:
        bwd[e.head].append(e.tail)
    return all(_bfs_all(fwd, 0)) and all(_bfs_all(bwd, 0))


def reweight(net: TripNetwork, weights: Sequence[int]) -> TripNetwork:
    if len(weights) != len(net.edges):
        raise NetworkError(f"{len(weights)} weights for {len(net.edges)} edges")
    for w in weights:
        if int(w) != w or w < 1:
            raise NetworkError(f"weight {w!r} is not a positive integer")
    es = tuple(Edge(e.tail, e.head, int(w)) for e, w in zip(net.edges, weights))
    return TripNetwork(net.node_count, es, net.trips, net.labels, net.meta)


def is_one_edge(net: TripNetwork) -> bool:
    return all(len(t) == 1 for t in net.trips)
