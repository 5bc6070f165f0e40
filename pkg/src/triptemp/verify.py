"""Generator-specific verification of instances that carry metadata."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import gen
from .model import (is_one_edge, schedule_to_temporalisation, strongly_connected,
                    symmetric_pairing)
from .reach import Evaluator
from .solve import (CapExceeded, exact_best, o2o_oracle, search_size,
                    strongly_temporalisable_check, symmetric_approx_schedule)

# weak-schedule enumeration budget used by the gap checks
WEAK_CAP = 200_000


class MissingMetadata(ValueError):
    pass


@dataclass
class Check:
    name: str
    ok: bool | None          # None = skipped
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        status = "skip" if self.ok is None else "pass" if self.ok else "fail"
        return {"check": self.name, "status": status, "detail": self.detail}


def _formula(net) -> gen.Formula:
    p = net.meta["params"]
    return gen.Formula(p["n"], tuple(tuple(c) for c in p["clauses"]))


def _o2o(net, opts) -> list[Check]:
    f = _formula(net)
    n, m = f.n, f.m
    out = [Check("trip count 3m + (2n+3m+1)", net.trip_count == 3 * m + 2 * n + 3 * m + 1,
                 {"trips": net.trip_count}),
           Check("node count 7m + n + 2", net.node_count == 7 * m + n + 2,
                 {"nodes": net.node_count})]
    if n <= opts.get("max_sat_vars", 12):
        sat = f.satisfying_assignment() is not None
        r = o2o_oracle(net, net.meta["s"], net.meta["t"])
        out.append(Check("SAT iff oracle feasible", sat == r.feasible,
                         {"sat": sat, "feasible": r.feasible}))
    return out


def _mroett(net, opts) -> list[Check]:
    p = net.meta["params"]
    q = gen.mroett_params(p["n"], p["m"], p["K"], p["M"])
    out = [Check("thresholds match closed forms",
                 all(net.meta["thresholds"][k] == q[k] for k in ("L", "U1", "U2")),
                 net.meta["thresholds"]),
           Check("node count M + |H| + 4", net.node_count == q["V"], {"nodes": net.node_count}),
           Check("one-edge trips", is_one_edge(net)),
           Check("strongly connected", strongly_connected(net))]
    a = opts.get("assignment")
    f = _formula(net)
    if a is None and f.n <= 16:
        a = f.satisfying_assignment()
    if a is not None:
        sched = gen.mroett_assignment_schedule(net, a)
        rep = Evaluator(net).report(schedule_to_temporalisation(net, sched).starts)
        blocks = [i for lab, i in net.meta["roles"].items() if lab.startswith("b_")]
        ok = all(rep.per_source[b] == net.node_count for b in blocks)
        out.append(Check("assignment schedule: every b_i reaches every node", ok,
                         {"assignment": [bool(x) for x in a], "total": rep.total}))
    return out


def _sym(net, opts) -> list[Check]:
    p = net.meta["params"]
    q = gen.sym_params(p["n"], p["m"], p["L"], p["l"])
    out = [Check("node count formula", net.node_count == q["V"], {"nodes": net.node_count, "formula": q["V"]}),
           Check("symmetric", bool(symmetric_pairing(net))),
           Check("strongly connected", strongly_connected(net))]
    a = opts.get("assignment")
    f = _formula(net)
    if a is None and f.n <= 16:
        a = f.satisfying_assignment()
    if a is None:
        out.append(Check("total >= Q", None, {"reason": "no satisfying assignment"}))
    elif not net.meta.get("paper_params"):
        out.append(Check("total >= Q", None, {"reason": "overridden parameters"}))
    else:
        tau = gen.sym_assignment_temporalisation(net, a)
        total = Evaluator(net).total(tau.starts)
        Q = net.meta["thresholds"]["Q"]
        out.append(Check("total >= Q", total >= Q, {"total": total, "Q": Q}))
    return out


def _hard(net, opts) -> list[Check]:
    lay = gen.HardFamilyLayout.from_network(net)
    r = lay.r
    out = [Check("node count r^2+2r", net.node_count == r * r + 2 * r),
           Check("trip count 4r+1", net.trip_count == 4 * r + 1)]
    bad = gen.recipe_cover(net, lay)
    out.append(Check("all pair recipes verified", not bad,
                     {"unconnected_pairs": [list(x) for x in bad[:5]]}))
    rep = gen.verify_hard_family_bound(net, lay, samples=opts.get("samples", 1000),
                                       seed=opts.get("seed", 0))
    out.append(Check("sampled total <= 15 n^1.5 and claim pairs unconnected", rep.ok,
                     {"samples": rep.samples, "max_total": rep.max_total,
                      "bound": rep.bound, "min_claim_pairs": rep.min_claim_pairs,
                      "failures": rep.failures[:3]}))
    return out


def _gap_value(net, source, cap, workers):
    if search_size(net.trip_count, "weak") > cap:
        raise CapExceeded("weak", search_size(net.trip_count, "weak"), cap)
    return exact_best(net, "weak", cap=cap, source=source, workers=workers).value


def _ssmrtt(net, opts) -> list[Check]:
    try:
        st = strongly_temporalisable_check(net, max_states=opts.get("max_states", 2_000_000))
        out = [Check("strongly temporalisable", st.value, {"certificate": st.certificate})]
    except CapExceeded as exc:
        out = [Check("strongly temporalisable", None, {"reason": str(exc)})]
    base, s, t = gen.embedded_base(net)
    feasible = o2o_oracle(base, s, t).feasible
    thr = net.meta["thresholds"]
    try:
        val = _gap_value(net, net.meta["source"], opts.get("cap", WEAK_CAP), opts.get("threads", 1))
    except CapExceeded as exc:
        out.append(Check("gap claim", None, {"reason": str(exc)}))
        return out
    ok = val >= thr["feasible_min"] if feasible else val <= thr["infeasible_max"]
    out.append(Check("reach(s') >= 2K" if feasible else "reach(s') <= K+n+1", ok,
                     {"base_feasible": feasible, "value": val, **thr}))
    return out


def _simple(net, opts) -> list[Check]:
    base, s, t = gen.embedded_base(net)
    feasible = o2o_oracle(base, s, t).feasible
    thr = net.meta["thresholds"]
    variant = net.meta["params"]["variant"]
    out = [Check("one-edge trips added", True, {"variant": variant, "K": net.meta["params"]["K"],
                                               "paper_params": net.meta["paper_params"]})]
    src = None if variant == "mrtt" else net.meta["source"]
    try:
        val = _gap_value(net, src, opts.get("cap", WEAK_CAP), opts.get("threads", 1))
    except CapExceeded as exc:
        out.append(Check("gap claim", None, {"reason": str(exc)}))
        return out
    ok = val >= thr["feasible_min"] if feasible else val <= thr["infeasible_max"]
    out.append(Check("gap claim", ok, {"base_feasible": feasible, "value": val, **thr}))
    return out


def _sqrtn(net, opts) -> list[Check]:
    r = net.meta["params"]["r"]
    out = [Check("node count r^2+2r", net.node_count == r * r + 2 * r, {"nodes": net.node_count})]
    bad = gen.recipe_cover(net, gen.HardFamilyLayout.from_network(net))
    out.append(Check("strongly temporalisable (recipe schedules)", not bad,
                     {"unconnected_pairs": [list(x) for x in bad[:5]]}))
    return out


def _random_sym(net, opts) -> list[Check]:
    out = [Check("symmetric", bool(symmetric_pairing(net))),
           Check("strongly connected", strongly_connected(net)),
           Check("unit weights", all(e.weight == 1 for e in net.edges))]
    res = symmetric_approx_schedule(net)
    out.append(Check("approximation total >= ceil(2n^2/9)", res.report.total >= res.bound,
                     {"total": res.report.total, "bound": res.bound}))
    return out


_BY_GENERATOR = {"o2o": _o2o, "mroett": _mroett, "sym": _sym, "hard-family": _hard,
                 "gap-ssmrtt": _ssmrtt, "gap-simple": _simple, "gap-sqrtn": _sqrtn,
                 "random-sym": _random_sym}


def verify_instance(net, **opts) -> list[Check]:
    meta = net.meta or {}
    fn = _BY_GENERATOR.get(meta.get("generator"))
    if fn is None:
        raise MissingMetadata("instance has no recognised generator metadata")
    return fn(net, opts)
