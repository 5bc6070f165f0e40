"""Exact search, one-to-one feasibility, colour coding, and the symmetric
2/9 approximation."""
from __future__ import annotations

import itertools
import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .model import (NotSymmetric, Schedule, SymmetricPairing, Temporalisation,
                    TripNetwork, WeakSchedule, durations, is_one_edge,
                    schedule_to_temporalisation, strongly_connected,
                    symmetric_pairing)
from .reach import Evaluator, ReachReport, reach_report

DEFAULT_CAP = 2_000_000
DEFAULT_STATE_CAP = 2_000_000


class CapExceeded(RuntimeError):
    def __init__(self, what: str, required: int, cap: int):
        super().__init__(f"{what}: search size {required} exceeds cap {cap}")
        self.what = what
        self.required = required
        self.cap = cap


class SolveError(ValueError):
    pass


# --------------------------------------------------------------------------
# exact enumeration

def fubini(k: int) -> int:
    """Number of ordered set partitions of a k-set."""
    a = [1]
    for n in range(1, k + 1):
        a.append(sum(math.comb(n, j) * a[n - j] for j in range(1, n + 1)))
    return a[k]


def search_size(k: int, mode: str, horizon: int | None = None) -> int:
    if mode == "perm":
        return math.factorial(k)
    if mode == "weak":
        return fubini(k)
    if mode == "grid":
        return (horizon + 1) ** k
    raise ValueError(f"unknown mode {mode!r}")


def rank_vectors(k: int) -> Iterator[tuple[int, ...]]:
    """Ordered set partitions as block-rank vectors, lexicographic.

    r[t] is the block of trip t; the used ranks are exactly 0..max(r).
    """
    r = [0] * k

    def rec(pos: int, used: int) -> Iterator[tuple[int, ...]]:
        # used: bitmask of ranks seen so far
        if pos == k:
            top = used.bit_length()
            if used == (1 << top) - 1:
                yield tuple(r)
            return
        left = k - pos
        for v in range(k):
            nu = used | (1 << v)
            # ranks below the current maximum that are still missing must fit
            gaps = nu.bit_length() - bin(nu).count("1")
            if gaps > left - 1:
                continue
            r[pos] = v
            yield from rec(pos + 1, nu)

    if k == 0:
        yield ()
        return
    yield from rec(0, 0)


def _blocks_of(r: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    nb = max(r) + 1 if r else 0
    return tuple(tuple(t for t, x in enumerate(r) if x == b) for b in range(nb))


def _enumerate(net: TripNetwork, mode: str, horizon: int | None):
    """Yield (assignment object, start vector) in lexicographic order."""
    k = net.trip_count
    dur = durations(net)
    if mode == "perm":
        for order in itertools.permutations(range(k)):
            starts = [0] * k
            clock = 0
            for t in order:
                starts[t] = clock
                clock += dur[t]
            yield Schedule(order), starts
    elif mode == "weak":
        for r in rank_vectors(k):
            blocks = _blocks_of(r)
            starts = [0] * k
            clock = 0
            for b in blocks:
                for t in b:
                    starts[t] = clock
                clock += max(dur[t] for t in b)
            yield WeakSchedule(blocks), starts
    elif mode == "grid":
        for st in itertools.product(range(horizon + 1), repeat=k):
            yield Temporalisation(tuple(st)), list(st)
    else:
        raise ValueError(f"unknown mode {mode!r}")


def _search_chunk(args):
    net, mode, horizon, source, chunk, nchunks = args
    ev = Evaluator(net)
    best = None
    for idx, (obj, starts) in enumerate(_enumerate(net, mode, horizon)):
        if idx % nchunks != chunk:
            continue
        val = ev.value(starts, source)
        if best is None or val > best[0]:
            best = (val, idx, obj)
    return best


@dataclass
class ExactResult:
    assignment: Schedule | WeakSchedule | Temporalisation
    value: int
    report: ReachReport
    explored: int
    elapsed_ms: float


def exact_best(net: TripNetwork, mode: str, horizon: int | None = None,
               cap: int | None = None, source: int | None = None,
               workers: int = 1) -> ExactResult:
    """Maximise reachability (total, or from ``source``) over a search space.

    Ties keep the first assignment in enumeration order, also when the work
    is split across processes.
    """
    if mode == "grid" and horizon is None:
        horizon = 2 * sum(durations(net))
    cap = DEFAULT_CAP if cap is None else cap
    size = search_size(net.trip_count, mode, horizon)
    if size > cap:
        raise CapExceeded(f"exact_best[{mode}]", size, cap)
    t0 = time.perf_counter()
    workers = max(1, int(workers))
    jobs = [(net, mode, horizon, source, c, workers) for c in range(workers)]
    if workers == 1:
        results = [_search_chunk(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_search_chunk, jobs))
    results = [r for r in results if r is not None]
    val, _, obj = max(results, key=lambda r: (r[0], -r[1]))
    tau = obj if isinstance(obj, Temporalisation) else schedule_to_temporalisation(net, obj)
    rep = reach_report(net, tau)
    return ExactResult(obj, val, rep, size, (time.perf_counter() - t0) * 1000)


# --------------------------------------------------------------------------
# one-to-one feasibility

@dataclass(frozen=True)
class Segment:
    trip: int
    entry: int
    exit: int


@dataclass(frozen=True)
class Witness:
    s: int
    t: int
    segments: tuple[Segment, ...]

    @property
    def trips(self) -> list[int]:
        return [g.trip for g in self.segments]

    def to_json(self) -> dict:
        return {"s": self.s, "t": self.t,
                "segments": [[g.trip, g.entry, g.exit] for g in self.segments]}


def _after_first(net: TripNetwork) -> list[dict[int, tuple[int, ...]]]:
    """succ[T][u] = nodes occurring after the first occurrence of u in T."""
    out = []
    for t in range(net.trip_count):
        nodes = net.trip_nodes(t)
        d: dict[int, tuple[int, ...]] = {}
        for i, u in enumerate(nodes):
            if u not in d:
                d[u] = tuple(sorted(set(nodes[i + 1:])))
        out.append(d)
    return out


class _O2OSearch:
    """BFS over (node, used-trip set) with subset dominance pruning.

    A state (v, S) is dropped when some (v, S0) with S0 a subset of S was
    already queued: everything the larger set can do, the smaller one can.
    """

    def __init__(self, net: TripNetwork, max_states: int | None = None):
        self.net = net
        self.succ = _after_first(net)
        self.trips_at: list[list[int]] = [[] for _ in range(net.node_count)]
        for t, d in enumerate(self.succ):
            for u in d:
                self.trips_at[u].append(t)
        self.max_states = DEFAULT_STATE_CAP if max_states is None else max_states

    def run(self, s: int, target: int | None = None, k_cap: int | None = None):
        n = self.net.node_count
        if not (0 <= s < n) or (target is not None and not (0 <= target < n)):
            raise IndexError("node out of range")
        masks: list[list[int]] = [[] for _ in range(n)]
        parent: dict[tuple[int, int], tuple[tuple[int, int], int] | None] = {(s, 0): None}
        first_hit: dict[int, tuple[int, int]] = {s: (s, 0)}
        masks[s].append(0)
        q = deque([(s, 0, 0)])
        explored = 1
        if target is not None and target == s:
            return first_hit, parent, explored
        while q:
            u, used, size = q.popleft()
            if k_cap is not None and size >= k_cap:
                continue
            for t in self.trips_at[u]:
                bit = 1 << t
                if used & bit:
                    continue
                nu = used | bit
                for v in self.succ[t][u]:
                    if any(m & nu == m for m in masks[v]):
                        continue
                    masks[v].append(nu)
                    parent[(v, nu)] = ((u, used), t)
                    explored += 1
                    if explored > self.max_states:
                        raise CapExceeded("o2o state space", explored, self.max_states)
                    if v not in first_hit:
                        first_hit[v] = (v, nu)
                        if v == target or len(first_hit) == n:
                            return first_hit, parent, explored
                    q.append((v, nu, size + 1))
        return first_hit, parent, explored

    @staticmethod
    def witness(s: int, t: int, parent, state) -> Witness:
        segs = []
        while parent[state] is not None:
            prev, trip = parent[state]
            segs.append(Segment(trip, prev[0], state[0]))
            state = prev
        return Witness(s, t, tuple(reversed(segs)))


@dataclass
class OracleResult:
    feasible: bool
    witness: Witness | None
    explored: int

    def __bool__(self) -> bool:
        return self.feasible


def o2o_oracle(net: TripNetwork, s: int, t: int, k_cap: int | None = None,
               max_states: int | None = None) -> OracleResult:
    srch = _O2OSearch(net, max_states)
    hits, parent, explored = srch.run(s, t, k_cap)
    if t in hits:
        return OracleResult(True, srch.witness(s, t, parent, hits[t]), explored)
    return OracleResult(False, None, explored)


def o2o_reachable(net: TripNetwork, s: int, k_cap: int | None = None,
                  max_states: int | None = None) -> set[int]:
    """All targets some temporalisation connects from s."""
    hits, _, _ = _O2OSearch(net, max_states).run(s, None, k_cap)
    return set(hits)


# --------------------------------------------------------------------------
# colour coding

def _colour_dp(net: TripNetwork, nodes_of: list[list[int]], s: int, t: int,
               k: int, colours: Sequence[int]) -> Witness | None:
    if s == t:
        return Witness(s, t, ())
    # layers[i][v][mask] = backpointer (x, trip, previous mask)
    layers: list[dict[int, dict[int, tuple | None]]] = [{s: {0: None}}]
    for i in range(k):
        cur = layers[i]
        nxt: dict[int, dict[int, tuple]] = {}
        for trip, nodes in enumerate(nodes_of):
            bit = 1 << colours[trip]
            prefix: dict[int, int] = {}  # mask -> node it came from
            for v in nodes:
                if prefix:
                    slot = nxt.get(v)
                    for mask, x in prefix.items():
                        if mask & bit:
                            continue
                        nm = mask | bit
                        if slot is None:
                            slot = nxt[v] = {}
                        if nm not in slot:
                            slot[nm] = (x, trip, mask)
                got = cur.get(v)
                if got:
                    for mask in got:
                        if mask not in prefix:
                            prefix[mask] = v
        layers.append(nxt)
        if t in nxt:
            mask = min(nxt[t])
            segs = []
            v, layer = t, i + 1
            while layer > 0:
                x, trip, prev = layers[layer][v][mask]
                segs.append(Segment(trip, x, v))
                v, mask, layer = x, prev, layer - 1
            return Witness(s, t, tuple(reversed(segs)))
        if not nxt:
            break
    return None


def colourings_up_to_relabel(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings with at most k symbols.

    The colour DP only looks at which trips share a colour, so one
    representative per relabelling class decides the same as all k**n.
    """
    a = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(a)
            return
        for c in range(min(top + 2, k)):
            a[i] = c
            yield from rec(i + 1, max(top, c))

    if n == 0:
        yield ()
        return
    yield from rec(0, -1)


def default_trials(k: int, delta: float = 0.01) -> int:
    return math.ceil(math.exp(k) * math.log(1 / delta))


@dataclass
class FptResult:
    decision: bool
    witness: Witness | None
    mode: str
    trials: int
    explored: int

    def __bool__(self) -> bool:
        return self.decision


def fpt_o2o(net: TripNetwork, s: int, t: int, k: int, mode: str = "random",
            trials: int | None = None, seed: int = 0, delta: float = 0.01,
            budget: int | None = None) -> FptResult:
    T = net.trip_count
    if not (1 <= k <= max(T, 1)):
        raise SolveError(f"k must satisfy 1 <= k <= |trips| = {T}")
    nodes_of = [net.trip_nodes(i) for i in range(T)]
    if mode == "oracle":
        r = o2o_oracle(net, s, t, k_cap=k)
        return FptResult(r.feasible, r.witness, mode, 0, r.explored)
    if mode == "exhaustive":
        runs = 0
        for col in colourings_up_to_relabel(T, k):
            runs += 1
            if budget is not None and runs > budget:
                raise CapExceeded("exhaustive colourings", runs, budget)
            w = _colour_dp(net, nodes_of, s, t, k, col)
            if w is not None:
                verify_witness(net, w)
                return FptResult(True, w, mode, runs, runs)
        return FptResult(False, None, mode, runs, runs)
    if mode == "random":
        trials = default_trials(k, delta) if trials is None else trials
        if budget is not None and trials > budget:
            raise CapExceeded("random colourings", trials, budget)
        for trial in range(trials):
            rng = np.random.default_rng([seed, trial])
            col = [int(c) for c in rng.integers(0, k, size=T)]
            w = _colour_dp(net, nodes_of, s, t, k, col)
            if w is not None:
                witness_to_schedule(net, w)  # raises if the witness does not hold
                return FptResult(True, w, mode, trial + 1, trial + 1)
        return FptResult(False, None, mode, trials, trials)
    raise ValueError(f"unknown fpt mode {mode!r}")


def verify_witness(net: TripNetwork, w: Witness) -> None:
    seen = set()
    at = w.s
    for g in w.segments:
        if g.trip in seen:
            raise SolveError(f"witness reuses trip {g.trip}")
        seen.add(g.trip)
        if g.entry != at:
            raise SolveError(f"witness segment on trip {g.trip} enters at {g.entry}, expected {at}")
        nodes = net.trip_nodes(g.trip)
        if g.entry not in nodes or g.exit not in nodes[nodes.index(g.entry) + 1:]:
            raise SolveError(f"trip {g.trip} does not pass {g.entry} before {g.exit}")
        at = g.exit
    if at != w.t:
        raise SolveError(f"witness ends at {at}, not {w.t}")


def witness_to_schedule(net: TripNetwork, w: Witness) -> Schedule:
    verify_witness(net, w)
    first = w.trips
    rest = [i for i in range(net.trip_count) if i not in set(first)]
    sched = Schedule(tuple(first + rest))
    ev = Evaluator(net)
    if not ev.connects(schedule_to_temporalisation(net, sched).starts, w.s, w.t):
        raise SolveError("witness schedule does not connect s to t")
    return sched


# --------------------------------------------------------------------------
# symmetric networks

def _require_pairing(net: TripNetwork) -> SymmetricPairing:
    p = symmetric_pairing(net)
    if isinstance(p, NotSymmetric):
        raise SolveError(f"network is not symmetric (trip {p.witness} has no reverse)")
    return p


def _level_blocks(net: TripNetwork, allowed: Sequence[int], partner: dict[int, int],
                  u: int, direction: str) -> list[int]:
    """Trips (in schedule order) realising one-to-all / all-to-one from u,
    using only the trips in ``allowed``."""
    allowed = sorted(set(allowed))
    edge_trips: dict[int, list[int]] = {}
    for t in allowed:
        for e in net.trips[t]:
            edge_trips.setdefault(e, [])
            if not edge_trips[e] or edge_trips[e][-1] != t:
                edge_trips[e].append(t)
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in sorted(edge_trips):
        ed = net.edges[e]
        a, b = (ed.tail, ed.head) if direction == "from_u" else (ed.head, ed.tail)
        adj.setdefault(a, []).append((e, b))
    level = {u: 0}
    tree_edge: list[tuple[int, int]] = []  # (level of child, edge)
    q = deque([u])
    while q:
        x = q.popleft()
        for e, y in adj.get(x, ()):
            if y not in level:
                level[y] = level[x] + 1
                tree_edge.append((level[y], e))
                q.append(y)
    covered: set[int] = set()
    placed: set[int] = set()
    blocks: list[list[int]] = []
    for lvl, e in tree_edge:  # BFS discovery order is level order
        while len(blocks) < lvl:
            blocks.append([])
        if e in covered:
            continue
        trip = edge_trips[e][0]
        for tr in (trip, partner[trip]):
            if tr not in placed:
                placed.add(tr)
                blocks[lvl - 1].append(tr)
                covered.update(net.trips[tr])
    if direction == "to_u":
        blocks.reverse()
    return [t for b in blocks for t in b]


def one_to_all_schedule(net: TripNetwork, u: int, direction: str = "from_u") -> Schedule:
    if direction not in ("from_u", "to_u"):
        raise ValueError(f"direction must be from_u or to_u, not {direction!r}")
    pairing = _require_pairing(net)
    order = _level_blocks(net, range(net.trip_count), pairing.partner(), u, direction)
    used = set(order)
    order += [t for t in range(net.trip_count) if t not in used]
    return Schedule(tuple(order))


@dataclass
class TransferTree:
    pairs: list[tuple[int, int]]
    node_owner: list[int]
    weight: list[int]
    parent: list[int]  # -1 for the root
    children: list[list[int]]
    pair_nodes: list[frozenset[int]]
    duplicates: list[int] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.weight)

    @property
    def tree_edges(self) -> list[tuple[int, int]]:
        return [(p, c) for c, p in enumerate(self.parent) if p >= 0]

    def neighbours(self, x: int) -> list[int]:
        out = list(self.children[x])
        if self.parent[x] >= 0:
            out.append(self.parent[x])
        return sorted(out)


def transfer_tree(net: TripNetwork) -> TransferTree:
    p = symmetric_pairing(net)
    if isinstance(p, NotSymmetric):
        raise SolveError(f"network is not symmetric (trip {p.witness} has no reverse)")
    # pairs repeating an earlier pair's trips add nothing to the tree
    seen: set[tuple] = set()
    pairs, dups = [], []
    for a, b in p.pairs:
        key = tuple(sorted((net.trips[a], net.trips[b])))
        if key in seen:
            dups += [a, b]
        else:
            seen.add(key)
            pairs.append((a, b))
    pair_nodes = [frozenset(net.trip_nodes(a)) for a, _ in pairs]
    n = net.node_count
    owner = [-1] * n
    at_node: list[list[int]] = [[] for _ in range(n)]
    for i, vs in enumerate(pair_nodes):
        for v in sorted(vs):
            at_node[v].append(i)
            if owner[v] < 0:
                owner[v] = i
    if any(o < 0 for o in owner):
        raise SolveError("some node lies on no trip")
    weight = [0] * len(pairs)
    for o in owner:
        weight[o] += 1
    P = len(pairs)
    parent = [-2] * P
    children: list[list[int]] = [[] for _ in range(P)]
    if P:
        parent[0] = -1
        q = deque([0])
        while q:
            x = q.popleft()
            nb = sorted({y for v in sorted(pair_nodes[x]) for y in at_node[v]})
            for y in nb:
                if parent[y] == -2:
                    parent[y] = x
                    children[x].append(y)
                    q.append(y)
    if any(x == -2 for x in parent):
        raise SolveError("transfer graph is disconnected (network not strongly connected)")
    return TransferTree(pairs, owner, weight, parent, children, pair_nodes, dups)


@dataclass
class CentroidPartition:
    centroid: int
    heavy: bool
    subtrees: list[list[int]]       # every pending subtree, sorted by weight
    subtree_weight: list[int]
    p1: list[int]                   # indices into subtrees
    p2: list[int]
    w1: int                         # weight of P1 plus the centroid
    w2: int
    total: int


def weighted_centroid_partition(tree: TransferTree) -> CentroidPartition:
    P = len(tree.pairs)
    if P == 0:
        raise SolveError("empty tree")
    K = tree.total
    # subtree weights rooted at 0 (children after parents in BFS order)
    order = [0]
    for x in order:
        order.extend(tree.children[x])
    sub = list(tree.weight)
    for x in reversed(order):
        if tree.parent[x] >= 0:
            sub[tree.parent[x]] += sub[x]
    c = 0
    while True:
        heavy_child = next((y for y in tree.children[c] if 2 * sub[y] > K), None)
        if heavy_child is None:
            break
        c = heavy_child
    comps = []
    for a in tree.neighbours(c):
        comp, stack = [], [a]
        seen = {c, a}
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in tree.neighbours(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append((sum(tree.weight[x] for x in comp), a, sorted(comp)))
    comps.sort(key=lambda z: (z[0], z[1]))
    subtrees = [z[2] for z in comps]
    sw = [z[0] for z in comps]
    wc = tree.weight[c]
    if 3 * wc > 2 * K:
        return CentroidPartition(c, True, subtrees, sw, [], list(range(len(subtrees))),
                                 wc, K - wc, K)
    p1, w1 = [], wc
    i = 0
    while 3 * w1 < K and i < len(subtrees):
        p1.append(i)
        w1 += sw[i]
        i += 1
    p2 = list(range(i, len(subtrees)))
    return CentroidPartition(c, False, subtrees, sw, p1, p2, w1, K - w1, K)


@dataclass
class ApproxResult:
    schedule: Schedule
    report: ReachReport
    tree: TransferTree
    partition: CentroidPartition

    @property
    def bound(self) -> int:
        n = len(self.tree.node_owner)
        return -(-2 * n * n // 9)


def symmetric_approx_schedule(net: TripNetwork) -> ApproxResult:
    pairing = _require_pairing(net)
    if not strongly_connected(net):
        raise SolveError("network is not strongly connected")
    tree = transfer_tree(net)
    part = weighted_centroid_partition(tree)
    partner = pairing.partner()
    for a, b in tree.pairs:
        partner[a], partner[b] = b, a
    C, Cbar = tree.pairs[part.centroid]
    cnodes = tree.pair_nodes[part.centroid]
    order: list[int] = []
    if part.heavy:
        order = [C, Cbar]
    else:
        def side(idx: int, direction: str) -> list[int]:
            comp = part.subtrees[idx]
            trips = [t for x in comp for t in tree.pairs[x]]
            vs = set().union(*(tree.pair_nodes[x] for x in comp))
            contact = min(vs & cnodes)
            return _level_blocks(net, trips, partner, contact, direction)

        for i in part.p1:
            order += side(i, "to_u")
        order += [C, Cbar]
        for i in part.p2:
            order += side(i, "from_u")
    used = set(order)
    order += [t for t in range(net.trip_count) if t not in used]
    sched = Schedule(tuple(order))
    rep = reach_report(net, schedule_to_temporalisation(net, sched))
    return ApproxResult(sched, rep, tree, part)


# --------------------------------------------------------------------------

@dataclass
class CheckResult:
    value: bool
    certificate: tuple[int, int] | None
    method: str

    def __bool__(self) -> bool:
        return self.value


def unreachable_certificate(reach: Sequence[set[int]], n: int) -> tuple[int, int] | None:
    """(s, t): t is the smallest node missed by some source; s is, among the
    sources missing t, the one reaching most nodes (lowest index on ties)."""
    for t in range(n):
        missing = [s for s in range(n) if t not in reach[s]]
        if missing:
            return max(missing, key=lambda s: (len(reach[s]), -s)), t
    return None


def strongly_temporalisable_check(net: TripNetwork, mode: str = "auto",
                                  max_states: int | None = None) -> CheckResult:
    from .reach import static_reach_sets
    if mode not in ("auto", "brute"):
        raise ValueError(f"unknown mode {mode!r}")
    n = net.node_count
    if mode == "auto":
        sym = not isinstance(symmetric_pairing(net), NotSymmetric)
        if sym or is_one_edge(net):
            gap = unreachable_certificate([set(r) for r in static_reach_sets(net)], n)
            return CheckResult(gap is None, gap, "symmetric" if sym else "one-edge")
    reach = [o2o_reachable(net, s, max_states=max_states) for s in range(n)]
    gap = unreachable_certificate(reach, n)
    return CheckResult(gap is None, gap, "brute")
