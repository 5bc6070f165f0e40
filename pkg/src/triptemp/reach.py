"""Temporal graphs induced by temporalisations, and temporal reachability.

Two independent routes are provided:

* ``earliest_arrival`` - single source, one pass over start-sorted edges.
* ``reach_bits`` - all sources at once.  Each node carries a big-int bitmask
  of the sources that have already arrived there; an edge starting at ``t``
  forwards the tail's mask, which lands at ``t + travel``.  Arrivals are held
  in a heap and released only before a later batch, so edges sharing a start
  time never enable each other (travel >= 1).
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import (Temporalisation, TripNetwork, check_int64, out_adjacency)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class TemporalEdge:
    tail: int
    head: int
    start: int
    travel: int

    @property
    def arrival(self) -> int:
        return self.start + self.travel


@dataclass(frozen=True)
class TemporalGraph:
    node_count: int
    edges: tuple[TemporalEdge, ...]


@dataclass(frozen=True)
class ReachReport:
    per_source: tuple[int, ...]
    total: int
    sets: tuple[tuple[int, ...], ...] | None = None
    subtotal_sources: tuple[int, ...] | None = None
    subtotal: int | None = None

    def with_subtotal(self, sources: Iterable[int]) -> "ReachReport":
        src = tuple(int(s) for s in sources)
        sub = sum(self.per_source[s] for s in src)
        return ReachReport(self.per_source, self.total, self.sets, src, sub)

    def to_json(self) -> dict:
        doc: dict = {"per_source": list(self.per_source), "total": self.total}
        if self.sets is not None:
            doc["sets"] = [list(s) for s in self.sets]
        if self.subtotal_sources is not None:
            doc["subtotal_sources"] = list(self.subtotal_sources)
            doc["subtotal"] = self.subtotal
        return doc


# --------------------------------------------------------------------------

class TripOffsets:
    """Per-trip edge offsets, precomputed once per network."""

    def __init__(self, net: TripNetwork):
        self.net = net
        self.rows: list[list[tuple[int, int, int, int]]] = []
        for ids in net.trips:
            off = 0
            row = []
            for i in ids:
                e = net.edges[i]
                row.append((off, e.tail, e.head, e.weight))
                off += e.weight
            self.rows.append(row)

    def edges(self, starts: Sequence[int]) -> list[tuple[int, int, int, int]]:
        if len(starts) != len(self.rows):
            raise ValueError(f"{len(starts)} start times for {len(self.rows)} trips")
        out = []
        for st, row in zip(starts, self.rows):
            for off, u, v, w in row:
                out.append((st + off, u, v, w))
        out.sort()
        return out


def induce_temporal_graph(net: TripNetwork, tau: Temporalisation) -> TemporalGraph:
    raw = TripOffsets(net).edges(tau.starts)
    for t, _, _, w in raw:
        check_int64(t)
        check_int64(t + w)
    return TemporalGraph(net.node_count, tuple(TemporalEdge(u, v, t, w) for t, u, v, w in raw))


def earliest_arrival(g: TemporalGraph, source: int) -> list[float | int | None]:
    if not (0 <= source < g.node_count):
        raise IndexError(f"source {source} out of range")
    arr: list = [None] * g.node_count
    arr[source] = NEG_INF
    for e in g.edges:
        a = arr[e.tail]
        if a is not None and a <= e.start:
            b = arr[e.head]
            if b is None or e.start + e.travel < b:
                arr[e.head] = e.start + e.travel
    return arr


def _reach_from_raw(n: int, raw: list[tuple[int, int, int, int]], source: int) -> list[bool]:
    """Same rule as earliest_arrival on pre-sorted raw tuples (fast path)."""
    inf = float("inf")
    arr = [inf] * n
    arr[source] = NEG_INF
    for t, u, v, w in raw:
        if arr[u] <= t and t + w < arr[v]:
            arr[v] = t + w
    return [a != inf for a in arr]


def _reach_bits_raw(n: int, raw: list[tuple[int, int, int, int]]) -> list[int]:
    reached = [1 << v for v in range(n)]
    pending: list[tuple[int, int, int, int]] = []
    seq = 0
    i, m = 0, len(raw)
    while i < m:
        t = raw[i][0]
        while pending and pending[0][0] <= t:
            _, _, v, mask = heapq.heappop(pending)
            reached[v] |= mask
        while i < m and raw[i][0] == t:
            _, u, v, w = raw[i]
            heapq.heappush(pending, (t + w, seq, v, reached[u]))
            seq += 1
            i += 1
    for _, _, v, mask in pending:
        reached[v] |= mask
    return reached


def reach_bits(net: TripNetwork, tau: Temporalisation) -> list[int]:
    """``bits[v] >> s & 1`` says whether v is reachable from s."""
    g = induce_temporal_graph(net, tau)
    raw = [(e.start, e.tail, e.head, e.travel) for e in g.edges]
    return _reach_bits_raw(net.node_count, raw)


def _bit_rows(bits: Sequence[int], n: int):
    nbytes = max(1, (n + 7) // 8)
    for b in bits:
        yield np.unpackbits(np.frombuffer(b.to_bytes(nbytes, "little"), dtype=np.uint8),
                            bitorder="little")[:n]


def report_from_bits(bits: Sequence[int], n: int, want_sets: bool = False) -> ReachReport:
    """Turn per-target source masks into per-source counts (and sets)."""
    if n == 0:
        return ReachReport((), 0, () if want_sets else None)
    counts = np.zeros(n, dtype=np.int64)
    cols: list[list[int]] | None = [[] for _ in range(n)] if want_sets else None
    for v, row in enumerate(_bit_rows(bits, n)):
        counts += row
        if cols is not None:
            for s in np.flatnonzero(row):
                cols[int(s)].append(v)
    per = tuple(int(c) for c in counts)
    sets = tuple(tuple(c) for c in cols) if cols is not None else None
    return ReachReport(per, sum(per), sets)


def reach_report(net: TripNetwork, tau: Temporalisation, want_sets: bool = False,
                 subtotal_sources: Iterable[int] | None = None) -> ReachReport:
    rep = report_from_bits(reach_bits(net, tau), net.node_count, want_sets)
    if subtotal_sources is not None:
        rep = rep.with_subtotal(subtotal_sources)
    return rep


def reach_set(net: TripNetwork, tau: Temporalisation, source: int) -> list[int]:
    g = induce_temporal_graph(net, tau)
    arr = earliest_arrival(g, source)
    return [v for v, a in enumerate(arr) if a is not None]


def static_reach_sets(net: TripNetwork) -> list[list[int]]:
    adj = out_adjacency(net)
    out = []
    for s in range(net.node_count):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        out.append(sorted(seen))
    return out


def digraph_reach_count(net: TripNetwork, want_sets: bool = False,
                        subtotal_sources: Iterable[int] | None = None) -> ReachReport:
    sets = static_reach_sets(net)
    per = tuple(len(s) for s in sets)
    rep = ReachReport(per, sum(per), tuple(tuple(s) for s in sets) if want_sets else None)
    if subtotal_sources is not None:
        rep = rep.with_subtotal(subtotal_sources)
    return rep


class Evaluator:
    """Repeated reach evaluation of one network under many start vectors."""

    def __init__(self, net: TripNetwork):
        self.net = net
        self.n = net.node_count
        self.offsets = TripOffsets(net)

    def total(self, starts: Sequence[int]) -> int:
        return sum(b.bit_count() for b in _reach_bits_raw(self.n, self.offsets.edges(starts)))

    def source_count(self, starts: Sequence[int], source: int) -> int:
        return sum(_reach_from_raw(self.n, self.offsets.edges(starts), source))

    def value(self, starts: Sequence[int], source: int | None) -> int:
        if source is None:
            return self.total(starts)
        return self.source_count(starts, source)

    def report(self, starts: Sequence[int], want_sets: bool = False) -> ReachReport:
        bits = _reach_bits_raw(self.n, self.offsets.edges(starts))
        return report_from_bits(bits, self.n, want_sets)

    def connects(self, starts: Sequence[int], s: int, t: int) -> bool:
        return _reach_from_raw(self.n, self.offsets.edges(starts), s)[t]
