"""Instance generators: SAT reductions, gap amplifications, the hard family
and random symmetric networks.

Every generated network carries a ``meta`` dict with the generator name, the
parameters used, a label -> index role map, thresholds, and whether all
parameters follow the closed-form defaults (``paper_params``).
"""
from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import (Schedule, Temporalisation, TripNetwork, durations,
                    schedule_to_temporalisation)
from .reach import Evaluator


class FormulaError(ValueError):
    pass


class GadgetTooLarge(ValueError):
    def __init__(self, what: str, sizes: dict, limit: int):
        super().__init__(f"{what}: {sizes} exceeds node limit {limit}")
        self.sizes = sizes
        self.limit = limit


class ConstructionError(RuntimeError):
    """A built-in verification failed; points at a construction bug."""


DEFAULT_NODE_LIMIT = 200_000


# --------------------------------------------------------------------------
# formulas

@dataclass(frozen=True)
class Formula:
    n: int
    clauses: tuple[tuple[int, int, int], ...]

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any((lit > 0) == bool(assignment[abs(lit) - 1]) for lit in c)
                   for c in self.clauses)

    def satisfying_assignment(self) -> tuple[bool, ...] | None:
        for bits in itertools.product((False, True), repeat=self.n):
            if self.satisfied_by(bits):
                return bits
        return None

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        lines += [" ".join(str(x) for x in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def check_formula(f: Formula) -> None:
    """Every variable must occur both positively and negatively."""
    pos = [False] * (f.n + 1)
    neg = [False] * (f.n + 1)
    for j, c in enumerate(f.clauses, 1):
        if len(c) != 3:
            raise FormulaError(f"clause {j} has {len(c)} literals, expected 3")
        for lit in c:
            if lit == 0 or abs(lit) > f.n:
                raise FormulaError(f"clause {j}: literal {lit} out of range 1..{f.n}")
            (pos if lit > 0 else neg)[abs(lit)] = True
    if f.m == 0:
        raise FormulaError("formula has no clauses")
    for i in range(1, f.n + 1):
        if not pos[i]:
            raise FormulaError(f"variable x{i} never appears positive")
        if not neg[i]:
            raise FormulaError(f"variable x{i} never appears negative")


def parse_and_normalize(text: str) -> Formula:
    """Parse DIMACS CNF; refuse (never repair) formulas that break the
    3-literal or polarity assumptions."""
    n = m = None
    lits: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormulaError(f"bad problem line: {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise FormulaError(f"bad problem line: {line!r}") from exc
            continue
        if n is None:
            raise FormulaError("clause before problem line")
        try:
            lits.extend(int(x) for x in line.split())
        except ValueError as exc:
            raise FormulaError(f"bad clause line: {line!r}") from exc
    if n is None:
        raise FormulaError("missing 'p cnf' problem line")
    clauses, cur = [], []
    for x in lits:
        if x == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    if cur:
        raise FormulaError("last clause is not terminated by 0")
    if len(clauses) != m:
        raise FormulaError(f"header says {m} clauses, found {len(clauses)}")
    for j, c in enumerate(clauses, 1):
        if len(c) != 3:
            raise FormulaError(f"clause {j} has {len(c)} literals, expected 3")
    f = Formula(n, tuple(clauses))  # type: ignore[arg-type]
    check_formula(f)
    return f


# --------------------------------------------------------------------------
# building blocks

class _Builder:
    def __init__(self):
        self.labels: list[str] = []
        self.index: dict[str, int] = {}
        self.edges: list[tuple[int, int, int]] = []
        self.book: dict[tuple[int, int, int], int] = {}
        self.trips: list[list[int]] = []
        self.trip_names: list[str] = []

    def node(self, label: str) -> int:
        if label in self.index:
            raise ConstructionError(f"duplicate node label {label}")
        self.index[label] = len(self.labels)
        self.labels.append(label)
        return self.index[label]

    def __getitem__(self, label: str) -> int:
        return self.index[label]

    def edge(self, u: int, v: int, w: int = 1) -> int:
        """Edge (u, v, w), reusing an identical existing one."""
        key = (u, v, w)
        if key not in self.book:
            self.book[key] = len(self.edges)
            self.edges.append(key)
        return self.book[key]

    def fresh_edge(self, u: int, v: int, w: int = 1) -> int:
        self.edges.append((u, v, w))
        self.book.setdefault((u, v, w), len(self.edges) - 1)
        return len(self.edges) - 1

    def walk(self, nodes: Sequence[int | str], name: str) -> int:
        ids = [self[x] if isinstance(x, str) else x for x in nodes]
        return self.trip([self.edge(a, b) for a, b in zip(ids, ids[1:])], name)

    def trip(self, edge_ids: Sequence[int], name: str) -> int:
        self.trips.append(list(edge_ids))
        self.trip_names.append(name)
        return len(self.trips) - 1

    def build(self, generator: str, params: dict, thresholds: dict | None = None,
              paper_params: bool = True, extra: dict | None = None) -> TripNetwork:
        meta = {
            "generator": generator,
            "params": params,
            "roles": {lab: i for i, lab in enumerate(self.labels)},
            "thresholds": thresholds or {},
            "paper_params": paper_params,
            "trip_roles": list(self.trip_names),
        }
        if extra:
            meta.update(extra)
        return TripNetwork.build(len(self.labels), self.edges, self.trips, self.labels, meta)


def trip_index(net: TripNetwork) -> dict[str, int]:
    return {name: i for i, name in enumerate(net.meta["trip_roles"])}


def _base_labels(base: TripNetwork) -> list[str]:
    return [base.label(v) for v in range(base.node_count)]


def _base_extent(base: TripNetwork) -> dict:
    return {"base": {"nodes": base.node_count, "edges": len(base.edges),
                     "trips": base.trip_count}}


def embedded_base(net: TripNetwork) -> tuple[TripNetwork, int, int]:
    """The base network copied at the front of a gap instance, with (s, t)."""
    ext = net.meta["base"]
    base = TripNetwork.build(ext["nodes"], net.edges[:ext["edges"]], net.trips[:ext["trips"]],
                             net.labels[:ext["nodes"]] if net.labels else None)
    return base, net.meta["params"]["s"], net.meta["params"]["t"]


def _copy_base(b: _Builder, base: TripNetwork, prefix: str = "") -> list[int]:
    """Copy nodes, edges (verbatim, parallel ones kept) and trips of base."""
    ids = [b.node(prefix + lab) for lab in _base_labels(base)]
    eid = [b.fresh_edge(ids[e.tail], ids[e.head], e.weight) for e in base.edges]
    for t, es in enumerate(base.trips):
        b.trip([eid[i] for i in es], f"base[{t}]")
    return ids


# --------------------------------------------------------------------------
# one-to-one reduction

def gen_o2o(f: Formula) -> tuple[TripNetwork, int, int]:
    """3-SAT -> one-to-one feasibility.

    The variable chains are indexed by literal occurrence, which coincides
    with the per-clause indexing whenever no literal repeats inside a clause.
    """
    check_formula(f)
    n, m = f.n, f.m
    pos: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
    neg: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
    for j, c in enumerate(f.clauses, 1):
        for h, lit in enumerate(c, 1):
            (pos if lit > 0 else neg)[abs(lit)].append((j, h))
    b = _Builder()
    for i in range(1, n + 1):
        b.node(f"v_{i}")
        for k in range(1, len(pos[i]) + 1):
            b.node(f"f_{i}^{k}")
        for k in range(1, len(neg[i]) + 1):
            b.node(f"t_{i}^{k}")
    b.node(f"v_{n + 1}")
    for j in range(1, m + 1):
        b.node(f"w_{j}")
        for h in (1, 2, 3):
            b.node(f"l_{j}^{h}")
    b.node(f"w_{m + 1}")

    def chain(i: int, kind: str, cnt: int) -> list[int]:
        return [b[f"v_{i}"]] + [b[f"{kind}_{i}^{k}"] for k in range(1, cnt + 1)] + [b[f"v_{i + 1}"]]

    for i in range(1, n + 1):
        for kind, cnt in (("f", len(pos[i])), ("t", len(neg[i]))):
            ch = chain(i, kind, cnt)
            for a, c in zip(ch, ch[1:]):
                b.edge(a, c)
    for j in range(1, m + 1):
        for h in (1, 2, 3):
            b.edge(b[f"w_{j}"], b[f"l_{j}^{h}"])
            b.edge(b[f"l_{j}^{h}"], b[f"w_{j + 1}"])
    b.edge(b[f"v_{n + 1}"], b["w_1"])
    long_trips = []
    for i in range(1, n + 1):
        for kind, occ in (("f", pos[i]), ("t", neg[i])):
            ch = chain(i, kind, len(occ))
            for k, (j, h) in enumerate(occ, 1):
                node, out = ch[k], ch[k + 1]
                long_trips.append((j, h, [b[f"w_{j}"], b[f"l_{j}^{h}"], node, out]))
    long_trips.sort(key=lambda z: (z[0], z[1]))
    for j, h, walk in long_trips:
        b.walk(walk, f"clause[{j},{h}]")
    used = {e for t in b.trips for e in t}
    for e in range(len(b.edges)):
        if e not in used:
            b.trip([e], f"edge[{e}]")
    s, t = b["v_1"], b[f"w_{m + 1}"]
    net = b.build("o2o", {"n": n, "m": m, "clauses": [list(c) for c in f.clauses]},
                  extra={"s": s, "t": t})
    return net, s, t


# --------------------------------------------------------------------------
# one-edge reduction

def mroett_params(n: int, m: int, K: int | None = None, M: int | None = None) -> dict:
    K0 = 91 * n * m
    Kv = K0 if K is None else K
    H = 2 * (Kv + 1) * m + 4 * n
    M0 = (H + 5) ** 2 + 1
    Mv = M0 if M is None else M
    L = (Mv * (Mv + H + 4) + (4 * Mv + 2 * H + 10) + Kv * m * (Mv + Kv * m + m)
         + m * (Mv + Kv * m + m) + 4 * n * (Mv + Kv) + m * (Mv + Kv) + Mv * Kv * m)
    U1 = Mv * (H + 5) + (H + 4) * (Mv + H + 4)
    U2 = (Mv * (Mv + H + 4) + (4 * Mv + 3 * H + 15) + (Kv * m * (Mv + Kv * m + m + 17) - Kv * Kv)
          + m * (Mv + Kv * m + m + 16) + 4 * n * (Mv + Kv * m + m + 7) + m * (Mv + Kv + 4)
          + Kv * m * (Mv + 4))
    return {"n": n, "m": m, "K": Kv, "M": Mv, "H": H, "V": Mv + H + 4,
            "L": L, "U1": U1, "U2": U2,
            "paper_K": K0, "paper_M": (2 * (K0 + 1) * m + 4 * n + 5) ** 2 + 1,
            "paper_params": K is None and M is None}


def gen_mroett(f: Formula, K: int | None = None, M: int | None = None,
               node_limit: int = DEFAULT_NODE_LIMIT) -> tuple[TripNetwork, dict]:
    check_formula(f)
    n, m = f.n, f.m
    p = mroett_params(n, m, K, M)
    if p["V"] > node_limit:
        raise GadgetTooLarge("mroett", {"nodes": p["V"], "K": p["K"], "M": p["M"], "H": p["H"]},
                             node_limit)
    K, M = p["K"], p["M"]
    b = _Builder()
    for i in range(1, n + 1):
        for lab in ("t", "f"):
            for s in (1, 2):
                b.node(f"{lab}_{i}^{s}")
    for j in range(1, m + 1):
        b.node(f"c_{j}^1")
        b.node(f"c_{j}^2")
    for j in range(1, m + 1):
        for i in range(1, K + 1):
            b.node(f"d_{j}^{i}")
    for j in range(1, m + 1):
        for i in range(1, K + 1):
            b.node(f"e_{j}^{i}")
    for q in range(1, 5):
        b.node(f"u_{q}")
    for i in range(1, M + 1):
        b.node(f"b_{i}")
    E = b.edge
    for i in range(1, n + 1):
        E(b[f"t_{i}^1"], b[f"f_{i}^2"])
        E(b[f"f_{i}^2"], b[f"f_{i}^1"])
        E(b[f"f_{i}^1"], b[f"t_{i}^2"])
        E(b[f"t_{i}^2"], b[f"t_{i}^1"])
    for j, c in enumerate(f.clauses, 1):
        for lit in c:
            lab = "t" if lit > 0 else "f"
            E(b[f"c_{j}^1"], b[f"{lab}_{abs(lit)}^1"])
            E(b[f"{lab}_{abs(lit)}^2"], b[f"c_{j}^2"])
        for h in range(1, m + 1):
            if h != j:
                E(b[f"c_{j}^1"], b[f"c_{h}^2"])
        for i in range(1, K + 1):
            E(b[f"d_{j}^{i}"], b[f"c_{j}^1"])
            E(b[f"c_{j}^2"], b[f"e_{j}^{i}"])
    for i in range(1, M + 1):
        E(b[f"b_{i}"], b["u_1"])
    E(b["u_1"], b["u_2"])
    for j in range(1, m + 1):
        for i in range(1, K + 1):
            E(b["u_2"], b[f"d_{j}^{i}"])
    for j in range(1, m + 1):
        for i in range(1, K + 1):
            E(b[f"e_{j}^{i}"], b["u_3"])
    E(b["u_3"], b["u_4"])
    for i in range(1, M + 1):
        E(b["u_4"], b[f"b_{i}"])
    for e in range(len(b.edges)):
        b.trip([e], f"edge[{e}]")
    thresholds = {"L": p["L"], "U1": p["U1"], "U2": p["U2"]}
    params = {"n": n, "m": m, "K": K, "M": M, "H": p["H"],
              "clauses": [list(c) for c in f.clauses],
              "paper_K": p["paper_K"], "paper_M": p["paper_M"]}
    net = b.build("mroett", params, thresholds, p["paper_params"])
    return net, p


_LABEL = re.compile(r"^([a-z]+)_(\d+)(?:\^(\d+))?$")


def _parse(label: str) -> tuple[str, int, int | None]:
    mt = _LABEL.match(label)
    if not mt:
        raise ValueError(label)
    return mt.group(1), int(mt.group(2)), int(mt.group(3)) if mt.group(3) else None


def mroett_assignment_schedule(net: TripNetwork, assignment: Sequence[bool]) -> Schedule:
    """Order the one-edge trips as in the satisfying-assignment argument:
    block -> d -> c^1 -> variable gadgets -> c^2 -> e -> block."""
    clauses = net.meta["params"]["clauses"]
    f = Formula(net.meta["params"]["n"], tuple(tuple(c) for c in clauses))
    if not f.satisfied_by(assignment):
        raise FormulaError("assignment does not satisfy the formula")
    true_order = [("t", 1, "f", 2), ("f", 2, "f", 1), ("f", 1, "t", 2), ("t", 2, "t", 1)]
    false_order = [("f", 1, "t", 2), ("t", 2, "t", 1), ("t", 1, "f", 2), ("f", 2, "f", 1)]
    keys = []
    for t, ids in enumerate(net.trips):
        e = net.edges[ids[0]]
        a, ai, ax = _parse(net.label(e.tail))
        h, hi, hx = _parse(net.label(e.head))
        if a == "b":
            slot = (0,)
        elif a == "u" and ai == 1:
            slot = (1,)
        elif a == "u" and ai == 2:
            slot = (2,)
        elif a == "d":
            slot = (3,)
        elif a == "c" and ax == 1:
            slot = (4,)
        elif a in "tf" and h in "tf":
            order = true_order if assignment[ai - 1] else false_order
            slot = (5, ai, order.index((a, ax, h, hx)))
        elif h == "c":
            slot = (6,)
        elif a == "c":
            slot = (7,)
        elif a == "e":
            slot = (8,)
        elif a == "u" and ai == 3:
            slot = (9,)
        else:
            slot = (10,)
        keys.append((slot, t))
    keys.sort()
    return Schedule(tuple(t for _, t in keys))


# --------------------------------------------------------------------------
# symmetric reduction

def sym_params(n: int, m: int, L: int | None = None, l: int | None = None) -> dict:
    base = 7 * n + m * (m + 3)
    l0 = -(-base * base // (m + 2)) + 1
    L0 = base * base + 1
    Lv = L0 if L is None else L
    lv = l0 if l is None else l
    V = 2 + 7 * n + m * (Lv + 1) * (m + 4) + m * lv + m * Lv
    return {"n": n, "m": m, "L": Lv, "l": lv, "V": V, "Q": V * V - base * base,
            "t_v": Lv + lv + 3, "paper_L": L0, "paper_l": l0,
            "paper_params": L is None and l is None}


def _check_sym_formula(f: Formula) -> None:
    check_formula(f)
    if f.m < 2:
        raise FormulaError("symmetric reduction needs at least two clauses")
    for j, c in enumerate(f.clauses, 1):
        if len({abs(x) for x in c}) != 3:
            raise FormulaError(f"clause {j} must mention three distinct variables")
    for lit in {x for c in f.clauses for x in c}:
        if all(lit in c for c in f.clauses):
            raise FormulaError(f"literal {lit} appears in every clause")


def gen_sym(f: Formula, L: int | None = None, l: int | None = None) -> tuple[TripNetwork, dict]:
    _check_sym_formula(f)
    n, m = f.n, f.m
    p = sym_params(n, m, L, l)
    L, l = p["L"], p["l"]
    b = _Builder()
    for i in range(1, n + 1):
        for lab in ("t_{i}^1", "t_{i}^2", "f_{i}^1", "f_{i}^2", "a_{i}^1", "a_{i}^2", "a_{i}^3"):
            b.node(lab.format(i=i))
    for j, c in enumerate(f.clauses, 1):
        b.node(f"c_{j}^1")
        b.node(f"c_{j}^2")
        for k in range(1, l + 1):
            b.node(f"d_{j}^{k}")
        for lit in c:
            b.node(f"e_{j}^{abs(lit)}")
        for h in range(1, m + 1):
            if h != j:
                b.node(f"g_{j}^{h}")
    b.node("B")
    for j, c in enumerate(f.clauses, 1):
        for lit in c:
            for k in range(1, L + 1):
                b.node(f"u_{j},{abs(lit)}^{k}")
        for h in range(1, m + 1):
            if h != j:
                for k in range(1, L + 1):
                    b.node(f"v_{j},{h}^{k}")
    b.node("U")
    for j, c in enumerate(f.clauses, 1):
        for lit in c:
            for k in range(1, L + 1):
                b.node(f"w_{j},{abs(lit)}^{k}")

    def pair(walk: list[str], name: str) -> None:
        b.walk(walk, name)
        b.walk(walk[::-1], name + "~")

    for i in range(1, n + 1):
        pair([f"t_{i}^1", f"a_{i}^3", f"f_{i}^2"], f"Tt[{i}]")
        pair([f"f_{i}^1", f"a_{i}^1", f"t_{i}^2"], f"Tf[{i}]")
        pair([f"a_{i}^1", f"a_{i}^2", f"a_{i}^3"], f"Ta[{i}]")
    middle = {j: [f"d_{j}^{k}" for k in range(1, l + 1)] for j in range(1, m + 1)}
    for j, c in enumerate(f.clauses, 1):
        for lit in c:
            i = abs(lit)
            tail = [f"u_{j},{i}^{k}" for k in range(1, L + 1)]
            var = f"t_{i}^1" if lit > 0 else f"f_{i}^1"
            pair(tail + ["B"] + middle[j] + [f"c_{j}^1", var], f"Tu[{j},{i}]")
    for j in range(1, m + 1):
        for h in range(1, m + 1):
            if h != j:
                tail = [f"v_{j},{h}^{k}" for k in range(1, L + 1)]
                pair(tail + ["B"] + middle[j] + [f"c_{j}^1", f"c_{h}^2", f"g_{j}^{h}"],
                     f"Tv[{j},{h}]")
    for j, c in enumerate(f.clauses, 1):
        for lit in c:
            i = abs(lit)
            tail = [f"w_{j},{i}^{k}" for k in range(1, L + 1)]
            var = f"t_{i}^2" if lit > 0 else f"f_{i}^2"
            pair(tail + ["U", var, f"c_{j}^2", f"e_{j}^{i}"], f"Tw[{j},{i}]")
    if len(b.labels) != p["V"]:
        raise ConstructionError(f"built {len(b.labels)} nodes, formula says {p['V']}")
    params = {"n": n, "m": m, "L": L, "l": l, "clauses": [list(c) for c in f.clauses],
              "paper_L": p["paper_L"], "paper_l": p["paper_l"], "t_v": p["t_v"]}
    net = b.build("sym", params, {"Q": p["Q"]}, p["paper_params"])
    return net, p


def sym_assignment_temporalisation(net: TripNetwork, assignment: Sequence[bool]) -> Temporalisation:
    prm = net.meta["params"]
    f = Formula(prm["n"], tuple(tuple(c) for c in prm["clauses"]))
    if len(assignment) != f.n or not f.satisfied_by(assignment):
        raise FormulaError("assignment does not satisfy the formula")
    L, l = prm["L"], prm["l"]
    tv = L + l + 3
    idx = trip_index(net)
    starts = [None] * net.trip_count

    def put(name: str, time: int) -> None:
        starts[idx[name]] = time

    for i in range(1, f.n + 1):
        if assignment[i - 1]:
            put(f"Tt[{i}]", tv), put(f"Ta[{i}]~", tv + 1), put(f"Tf[{i}]", tv + 2)
            put(f"Tf[{i}]~", tv + 8), put(f"Ta[{i}]", tv + 9), put(f"Tt[{i}]~", tv + 10)
        else:
            put(f"Tf[{i}]", tv), put(f"Ta[{i}]", tv + 1), put(f"Tt[{i}]", tv + 2)
            put(f"Tt[{i}]~", tv + 8), put(f"Ta[{i}]~", tv + 9), put(f"Tf[{i}]~", tv + 10)
    for j, c in enumerate(f.clauses, 1):
        for lit in c:
            i = abs(lit)
            put(f"Tu[{j},{i}]", 1)
            put(f"Tu[{j},{i}]~", tv + 12)
            put(f"Tw[{j},{i}]", tv + 4 - (L + 1))
            put(f"Tw[{j},{i}]~", tv + 6)
        for h in range(1, f.m + 1):
            if h != j:
                put(f"Tv[{j},{h}]", tv - (L + l) + 3)
                put(f"Tv[{j},{h}]~", tv + 6)
    if any(s is None for s in starts):
        raise ConstructionError("some trip received no start time")
    return Temporalisation(tuple(starts))


# --------------------------------------------------------------------------
# hard family

@dataclass(frozen=True)
class HardFamilyLayout:
    r: int
    nodes: dict[str, int]
    trips: dict[str, int]
    embedded: bool = False   # True for the square-root gap instance

    def __post_init__(self):
        kinds = {}
        for lab, i in self.nodes.items():
            try:
                a, k, j = _parse(lab)
            except ValueError:
                continue
            if a == "c":
                kinds[i] = ("cU", k) if k <= self.r else ("cL", k - self.r)
            elif a == "d":
                kinds[i] = ("d", k, j)
            else:
                kinds[i] = (a, k)
        object.__setattr__(self, "_kinds", kinds)

    @classmethod
    def from_network(cls, net: TripNetwork) -> "HardFamilyLayout":
        g = (net.meta or {}).get("generator")
        if g == "hard-family":
            return cls(net.meta["params"]["r"], dict(net.meta["roles"]), trip_index(net))
        if g == "gap-sqrtn":
            r = net.meta["params"]["r"]
            trips = trip_index(net)
            # each replacement trip contains the r-indexed trip it replaces
            trips[f"TU[{r}]"] = trips["T_U"]
            trips[f"TL[{r}]"] = trips["T_L"]
            trips[f"Tdl[{r}]"] = trips[f"Tdr[{r}]"] = trips["T_updown"]
            return cls(r, dict(net.meta["roles"]), trips, embedded=True)
        raise ValueError("not a hard-family or square-root gap instance")

    def kind(self, v: int) -> tuple:
        """('cU',k) | ('u',k) | ('cL',k) | ('l',k) | ('d',k,j) with 1-based k."""
        return self._kinds[v]

    def d_node(self, h: int, j: int) -> int:
        if j == 1:
            return self.nodes[f"u_{h}"]
        if j == self.r:
            return self.nodes[f"l_{h}"]
        return self.nodes[f"d_{h}^{j}"]


def _hard_nodes_edges(b: _Builder, r: int) -> dict[str, list[str]]:
    """Nodes and edges of the hard family; returns the trip walks by name."""
    for i in range(1, 2 * r + 1):
        b.node(f"c_{i}")
    for i in range(1, r + 1):
        b.node(f"u_{i}")
    for i in range(1, r + 1):
        b.node(f"l_{i}")
    for i in range(1, r + 1):
        for j in range(2, r):
            b.node(f"d_{i}^{j}")

    def c(i: int) -> str:
        return f"c_{i}"

    tail_u = []
    for k in range(2, r + 1):
        tail_u += [c(k), c(k - 1)]
    tail_l = []
    for k in range(r + 2, 2 * r + 1):
        tail_l += [c(k), c(k - 1)]

    def dn(i: int, j: int) -> str:
        return f"u_{i}" if j == 1 else f"l_{i}" if j == r else f"d_{i}^{j}"

    walks: dict[str, list[str]] = {}
    for i in range(1, r + 1):
        walks[f"TU[{i}]"] = [c(1), f"u_{i}"] + tail_u
    for i in range(1, r + 1):
        walks[f"TL[{i}]"] = tail_l + [f"l_{i}", c(2 * r)]
    for i in range(1, r + 1):
        walks[f"Tdl[{i}]"] = [dn(i, j) for j in range(1, r + 1)]
    for i in range(1, r + 1):
        walks[f"Tdr[{i}]"] = [dn(i, j) for j in range(1, r + 1)]
    walks["Tup"] = [c(r + 1), c(r)]
    # E^U, E^L, descending and ascending edges, in construction order
    for i in range(1, r):
        b.edge(b[c(i + 1)], b[c(i)])
    for i in range(1, r - 1):
        b.edge(b[c(i)], b[c(i + 2)])
    for i in range(1, r + 1):
        b.edge(b[c(1)], b[f"u_{i}"])
        b.edge(b[f"u_{i}"], b[c(2)])
    for i in range(1, r):
        b.edge(b[c(r + i + 1)], b[c(r + i)])
    for i in range(1, r - 1):
        b.edge(b[c(r + i)], b[c(r + i + 2)])
    for i in range(1, r + 1):
        b.edge(b[c(2 * r - 1)], b[f"l_{i}"])
        b.edge(b[f"l_{i}"], b[c(2 * r)])
    for i in range(1, r + 1):
        for j in range(1, r):
            b.edge(b[dn(i, j)], b[dn(i, j + 1)])
    b.edge(b[c(r + 1)], b[c(r)])
    return walks


def gen_hard_family(r: int) -> tuple[TripNetwork, HardFamilyLayout]:
    if r <= 3:
        raise ValueError("hard family needs r > 3")
    b = _Builder()
    walks = _hard_nodes_edges(b, r)
    for name, w in walks.items():
        b.walk(w, name)
    n = r * r + 2 * r
    net = b.build("hard-family", {"r": r}, {"max_total": 15 * n ** 1.5,
                                            "claim_pairs_min": (r - 1) * (r - 2) ** 3})
    if net.node_count != n or net.trip_count != 4 * r + 1:
        raise ConstructionError("hard family size mismatch")
    return net, HardFamilyLayout.from_network(net)


def _su(lay: HardFamilyLayout, i: int) -> list[int]:
    r = lay.r
    return [lay.trips[f"TU[{j}]"] for j in range(1, r + 1) if j != i] + [lay.trips[f"TU[{i}]"]]


def _sl(lay: HardFamilyLayout, i: int) -> list[int]:
    r = lay.r
    return [lay.trips[f"TL[{i}]"]] + [lay.trips[f"TL[{j}]"] for j in range(1, r + 1) if j != i]


def _recipe(lay: HardFamilyLayout, src: tuple, dst: tuple) -> list[list[int]]:
    T = lay.trips
    TU = lambda i: [T[f"TU[{i}]"]]  # noqa: E731
    TL = lambda i: [T[f"TL[{i}]"]]  # noqa: E731
    Tdl = lambda i: [T[f"Tdl[{i}]"]]  # noqa: E731
    Tdr = lambda i: [T[f"Tdr[{i}]"]]  # noqa: E731
    SU = lambda i: _su(lay, i)  # noqa: E731
    SL = lambda i: _sl(lay, i)  # noqa: E731
    up = [T["Tup"]]
    a, h = src[0], src[1]
    d, k = dst[0], dst[1]
    if a == "cU":
        if d == "cU":
            return [SU(1)] if k < h else [TU(1)]
        if d == "u":
            return [SU(k)]
        if d == "cL":
            return [SU(1), Tdl(1), SL(1)]
        return [SU(k), Tdl(k)]
    if a == "u":
        if d == "cU":
            return [TU(h)]
        if d == "u":
            return [TU(h), TU(k)]
        if d == "cL":
            return [Tdl(h), SL(h)]
        return [Tdl(k)] if k == h else [TU(h), TU(k), Tdl(k)]
    if a == "cL":
        if d == "cU":
            return [SL(1), up, SU(1)]
        if d == "u":
            return [SL(1), up, SU(k)]
        if d == "cL":
            return [SL(1)] if k < h else [TL(1)]
        if d == "l":
            return [TL(k)]
        return [SL(1), up, SU(k), Tdl(k)]
    if a == "l":
        if d == "cU":
            return [SL(h), up, SU(1)]
        if d == "u":
            return [SL(h), up, SU(k)]
        if d == "cL":
            return [SL(h)]
        if d == "l":
            return [TL(h), TL(k)]
        return [SL(h), up, SU(k), Tdl(k)]
    # a == "d"
    if d in ("cU", "u"):
        return [Tdl(h), SL(h), up, SU(k)]
    if d == "cL":
        return [Tdl(h), SL(h)]
    if d == "l":
        return [Tdl(h)] if k == h else [Tdl(h), TL(h), TL(k)]
    if k != h:
        return [Tdl(h), SL(h), up, SU(k), Tdl(k)]
    if dst[2] > src[2]:
        return [Tdl(h)]
    return [Tdl(h), SL(h), up, SU(k), Tdr(k)]


def _recipe_order(net: TripNetwork, layout: HardFamilyLayout, u: int, v: int) -> tuple[int, ...]:
    if u == v:
        return tuple(range(net.trip_count))
    order: list[int] = []
    for part in _recipe(layout, layout.kind(u), layout.kind(v)):
        for t in part:
            if t in order:
                if layout.embedded:
                    continue
                raise ConstructionError(f"recipe for {u}->{v} repeats trip {t}")
            order.append(t)
    placed = set(order)
    return tuple(order + [t for t in range(net.trip_count) if t not in placed])


def hard_family_recipe_schedule(net: TripNetwork, layout: HardFamilyLayout,
                                u: int, v: int, evaluator: Evaluator | None = None) -> Schedule:
    """Schedule from the per-cell recipe table; verified before returning."""
    sched = Schedule(_recipe_order(net, layout, u, v))
    ev = evaluator or Evaluator(net)
    if not ev.connects(schedule_to_temporalisation(net, sched).starts, u, v):
        raise ConstructionError(
            f"recipe {layout.kind(u)} -> {layout.kind(v)} does not connect {net.label(u)} to {net.label(v)}")
    return sched


def recipe_cover(net: TripNetwork, layout: HardFamilyLayout) -> list[tuple[int, int]]:
    """Ordered pairs the recipe schedules fail to connect (empty = strongly
    temporalisable). Each distinct schedule is evaluated once."""
    from .reach import _reach_bits_raw
    groups: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    n = net.node_count
    for u in range(n):
        for v in range(n):
            if u != v:
                groups.setdefault(_recipe_order(net, layout, u, v), []).append((u, v))
    ev = Evaluator(net)
    bad = []
    for order, pairs in groups.items():
        bits = _reach_bits_raw(n, ev.offsets.edges(schedule_to_temporalisation(net, Schedule(order)).starts))
        bad += [(u, v) for u, v in pairs if not bits[v] >> u & 1]
    return bad


def claim_pairs(layout: HardFamilyLayout, i_min: int, i_max: int) -> list[tuple[int, int]]:
    r = layout.r
    out = []
    for h1 in range(1, r + 1):
        for h2 in range(1, r + 1):
            if h1 == h2 or (h1 == i_min and h2 == i_max):
                continue
            for l1 in range(2, r):
                for l2 in range(2, r):
                    out.append((layout.d_node(h1, l1), layout.d_node(h2, l2)))
    return out


def hard_family_extremes(layout: HardFamilyLayout, starts: Sequence[int]) -> tuple[int, int]:
    """(i_min, i_max): earliest lower trip and latest upper trip, lowest index on ties."""
    r = layout.r
    lo = [starts[layout.trips[f"TL[{i}]"]] for i in range(1, r + 1)]
    hi = [starts[layout.trips[f"TU[{i}]"]] for i in range(1, r + 1)]
    return lo.index(min(lo)) + 1, hi.index(max(hi)) + 1


@dataclass
class BoundReport:
    samples: int
    max_total: int
    bound: float
    min_claim_pairs: int
    failures: list[dict]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_hard_family_bound(net: TripNetwork, layout: HardFamilyLayout,
                             samples: int = 1000, seed: int = 0,
                             temporalisations: Iterable[Sequence[int]] | None = None) -> BoundReport:
    """Check the claim pairs stay unconnected and the total stays under
    15 n^1.5 for sampled schedules (or the given start vectors)."""
    from .reach import _reach_bits_raw
    n = net.node_count
    bound = 15 * n ** 1.5
    ev = Evaluator(net)
    if temporalisations is None:
        rng = random.Random(seed)
        dur = durations(net)

        def draws():
            for _ in range(samples):
                order = list(range(net.trip_count))
                rng.shuffle(order)
                st = [0] * net.trip_count
                clock = 0
                for t in order:
                    st[t] = clock
                    clock += dur[t]
                yield st
        temporalisations = draws()
    count = 0
    worst = 0
    min_pairs = None
    failures = []
    for st in temporalisations:
        count += 1
        bits = _reach_bits_raw(n, ev.offsets.edges(st))
        total = sum(x.bit_count() for x in bits)
        worst = max(worst, total)
        i_min, i_max = hard_family_extremes(layout, st)
        pairs = claim_pairs(layout, i_min, i_max)
        min_pairs = len(pairs) if min_pairs is None else min(min_pairs, len(pairs))
        bad = [(a, c) for a, c in pairs if bits[c] >> a & 1]
        if bad or total > bound:
            failures.append({"starts": list(st), "total": total,
                             "connected_claim_pairs": bad[:5]})
    return BoundReport(count, worst, bound, min_pairs or 0, failures)


# --------------------------------------------------------------------------
# gap constructions

def gen_ssmrtt_gap(base: TripNetwork, s: int, t: int, eps: float) -> tuple[TripNetwork, int, dict]:
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    if s == t:
        raise ValueError("s and t must differ")
    n = base.node_count
    K = math.ceil(2 * (n + 1) / eps)
    b = _Builder()
    ids = _copy_base(b, base)
    u = [ids[s]] + [ids[v] for v in range(n) if v not in (s, t)] + [ids[t]]
    sp = b.node("s'")
    A = [b.node(f"a_{i}") for i in range(1, K + 1)]
    B = [b.node(f"b_{i}") for i in range(1, K + 1)]
    S, T = ids[s], ids[t]
    b.edge(sp, S)
    b.edge(S, sp)
    for X in (A, B):
        for i in range(K - 1):
            b.edge(X[i], X[i + 1])
            b.edge(X[i + 1], X[i])
    for x, y in ((T, A[0]), (A[0], T), (T, B[0]), (A[-1], S), (B[-1], S),
                 (A[-1], B[0]), (B[0], A[-1])):
        b.edge(x, y)
    base_edge = {}
    for i, e in enumerate(base.edges):
        base_edge.setdefault((ids[e.tail], ids[e.head]), i)

    def link(x: int, y: int) -> int:
        if (x, y) in base_edge:
            return base_edge[(x, y)]
        return b.edge(x, y)

    for i in range(n - 1):
        link(u[i], u[i + 1])
        link(u[i + 1], u[i])

    def walk(nodes: list[int], name: str) -> int:
        es = []
        for x, y in zip(nodes, nodes[1:]):
            es.append(link(x, y) if x in ids and y in ids else b.edge(x, y))
        return b.trip(es, name)

    walk([T] + A + u, "TA")
    walk([T] + B + u, "TB")
    walk(u + A + B + B[-2::-1] + A[::-1] + u[::-1] + [sp, S], "TC")
    net = b.build("gap-ssmrtt", {"eps": eps, "K": K, "n": n, "s": S, "t": T},
                  {"feasible_min": 2 * K, "infeasible_max": K + n + 1},
                  extra={"source": sp, **_base_extent(base)})
    return net, sp, net.meta["params"]


def gen_simple_gaps(base: TripNetwork, s: int, t: int, variant: str = "mrtt",
                    K: int | None = None, c: float = 1.0, eps: float = 0.5) -> tuple[TripNetwork, dict]:
    n = base.node_count
    if variant == "mrtt":
        K0 = math.ceil((c * n) ** (1 / eps) * (n + 2) ** ((2 - eps) / eps))
    elif variant == "ssmrtt":
        K0 = math.ceil(c * n ** (2 / eps))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    Kv = K0 if K is None else K
    b = _Builder()
    ids = _copy_base(b, base)
    S, T = ids[s], ids[t]
    if variant == "mrtt":
        ins = [b.node(f"v_{n + i}") for i in range(1, Kv + 1)]
        outs = [b.node(f"v_{n + Kv + i}") for i in range(1, Kv + 1)]
        for x in ins:
            b.trip([b.edge(x, S)], f"in[{x}]")
        for y in outs:
            b.trip([b.edge(T, y)], f"out[{y}]")
        thr = {"feasible_min": Kv * Kv, "infeasible_max": n * n + 2 * n * Kv - 1}
    else:
        outs = [b.node(f"v_{n + i}") for i in range(1, Kv + 1)]
        for y in outs:
            b.trip([b.edge(T, y)], f"out[{y}]")
        thr = {"feasible_min": Kv + 2, "infeasible_max": n - 1}
    params = {"variant": variant, "K": Kv, "paper_K": K0, "c": c, "eps": eps, "n": n,
              "s": S, "t": T}
    net = b.build("gap-simple", params, thr, K is None, extra={"source": S, **_base_extent(base)})
    return net, params


def gen_sqrtn_gap(base: TripNetwork, s: int, t: int) -> tuple[TripNetwork, dict]:
    p = base.node_count
    if s == t:
        raise ValueError("s and t must differ")
    r = p + 1
    if r <= 3:
        raise ValueError("base needs at least three nodes")
    b = _Builder()
    walks = _hard_nodes_edges(b, r)

    def dr(j: int) -> int:
        return b[f"u_{r}"] if j == 1 else b[f"l_{r}"] if j == r else b[f"d_{r}^{j}"]

    others = [v for v in range(p) if v not in (s, t)]
    x = [t] + others + [s]                # x_1 = t, ..., x_p = s
    to_new = {v: dr(i) for i, v in enumerate(x, 1)}
    eid = [b.fresh_edge(to_new[e.tail], to_new[e.head], e.weight) for e in base.edges]
    for i in range(1, r):
        b.edge(dr(i + 1), dr(i))
    for i in range(1, r):
        b.edge(b[f"u_{i + 1}"], b[f"u_{i}"])
    for i in range(1, r):
        b.edge(b[f"l_{i}"], b[f"l_{i + 1}"])
    b.edge(b["u_1"], b["c_1"])
    b.edge(b[f"c_{2 * r}"], b["l_1"])
    for k, es in enumerate(base.trips):
        b.trip([eid[i] for i in es], f"base[{k}]")
    for name, w in walks.items():
        if name in (f"TU[{r}]", f"TL[{r}]", f"Tdl[{r}]", f"Tdr[{r}]"):
            continue
        b.walk(w, name)
    tU = [f"u_{r}"] + [f"u_{i}" for i in range(r - 1, 0, -1)] + ["c_1", f"u_{r}"]
    for k in range(2, r + 1):
        tU += [f"c_{k}", f"c_{k - 1}"]
    b.walk(tU, "T_U")
    b.walk(walks[f"TL[{r}]"] + [f"l_{i}" for i in range(1, r + 1)], "T_L")
    sN, tN = dr(r - 1), dr(1)
    ud = [sN] + [dr(j) for j in range(r - 2, 0, -1)] + [dr(j) for j in range(2, r - 1)] + [sN, dr(r), sN]
    b.walk(ud, "T_updown")
    n = r * r + 2 * r
    thr = {"feasible_min": ((r - 1) * r) ** 2, "infeasible_max": 3 * r * n + 7 * r * r * (r - 1)}
    net = b.build("gap-sqrtn", {"r": r, "p": p, "s": sN, "t": tN,
                                "base_map": {str(v): to_new[v] for v in range(p)}}, thr)
    return net, net.meta["params"]


# --------------------------------------------------------------------------
# random symmetric networks

def gen_random_symmetric(n: int, pair_count: int | None = None, seed: int = 0) -> TripNetwork:
    """Random tree, covered by random walks; every walk is emitted together
    with its reverse."""
    if n < 2:
        raise ValueError("n must be at least 2")
    pair_count = max(1, n // 3) if pair_count is None else pair_count
    if pair_count < 1:
        raise ValueError("pair_count must be at least 1")
    rng = random.Random(seed)
    perm = list(range(n))
    rng.shuffle(perm)
    adj: list[list[int]] = [[] for _ in range(n)]
    tree = []
    for i in range(1, n):
        a, c = perm[rng.randrange(i)], perm[i]
        adj[a].append(c)
        adj[c].append(a)
        tree.append(frozenset((a, c)))
    for a in adj:
        a.sort()
    uncovered = set(tree)
    walks: list[list[int]] = []
    while uncovered:
        e = sorted(uncovered, key=sorted)[rng.randrange(len(uncovered))]
        uncovered.discard(e)
        a, c = sorted(e)
        path = [a, c]
        for end in (1, 0):
            while True:
                x = path[-1] if end else path[0]
                opts = [y for y in adj[x] if frozenset((x, y)) in uncovered]
                if not opts:
                    break
                y = opts[rng.randrange(len(opts))]
                uncovered.discard(frozenset((x, y)))
                if end:
                    path.append(y)
                else:
                    path.insert(0, y)
        walks.append(path)

    def tree_path(x: int, y: int) -> list[int]:
        par = {x: None}
        q = [x]
        for z in q:
            for w in adj[z]:
                if w not in par:
                    par[w] = z
                    q.append(w)
        out = [y]
        while out[-1] != x:
            out.append(par[out[-1]])
        return out[::-1]

    while len(walks) > pair_count:
        b2 = walks.pop()
        a2 = walks.pop(rng.randrange(len(walks)))
        walks.append(a2 + tree_path(a2[-1], b2[0])[1:-1] + b2 if a2[-1] != b2[0]
                     else a2 + b2[1:])
    while len(walks) < pair_count:
        x = rng.randrange(n)
        w = [x]
        for _ in range(rng.randint(1, 3)):
            w.append(adj[w[-1]][rng.randrange(len(adj[w[-1]]))])
        walks.append(w)
    b = _Builder()
    for v in range(n):
        b.node(f"v{v}")
    for k, w in enumerate(walks):
        b.walk(w, f"W[{k}]")
        b.walk(w[::-1], f"W[{k}]~")
    return b.build("random-sym", {"n": n, "pairs": pair_count, "seed": seed})
