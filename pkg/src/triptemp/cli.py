"""triptemp command line: gen, eval, solve, check, verify.

Exactly one JSON document goes to stdout; diagnostics go to stderr.
Exit codes: 0 success, 1 domain refusal (infeasible / false / formula
assumption violated), 2 usage, IO, cap or metadata errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import gen, io
from .model import (NetworkError, Schedule, TripNetwork, WeakSchedule, is_one_edge,
                    schedule_to_temporalisation, strongly_connected, symmetric_pairing)
from .reach import Evaluator, reach_report, static_reach_sets
from .solve import (CapExceeded, SolveError, unreachable_certificate, exact_best, fpt_o2o, o2o_oracle,
                    strongly_temporalisable_check, symmetric_approx_schedule,
                    witness_to_schedule)
from .verify import MissingMetadata, verify_instance

EXIT_OK, EXIT_REFUSED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(doc) -> None:
    sys.stdout.write(io.canonical(doc))


def _fail(code: int, message: str, **extra) -> int:
    print(f"triptemp: {message}", file=sys.stderr)
    _emit({"error": message, **extra})
    return code


def _node(net: TripNetwork, x: str) -> int:
    try:
        v = int(x)
    except ValueError:
        if net.labels is None or x not in net.labels:
            raise UsageError(f"unknown node {x!r}")
        return net.labels.index(x)
    if not 0 <= v < net.node_count:
        raise UsageError(f"node {v} out of range 0..{net.node_count - 1}")
    return v


def _node_list(net: TripNetwork, text: str) -> list[int]:
    return [_node(net, x.strip()) for x in text.split(",") if x.strip()]


def _write_or_emit(args, doc) -> None:
    if getattr(args, "output", None):
        io.write_text(args.output, io.canonical(doc))
    _emit(doc)


# ---------------------------------------------------------------- gen

def _read_cnf(path: str) -> gen.Formula:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return gen.parse_and_normalize(text)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"gen {args.kind} requires " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _base(args):
    _need(args, "base", "s", "t")
    base = io.load_network(args.base)
    return base, _node(base, args.s), _node(base, args.t)


def cmd_gen(args) -> int:
    k = args.kind
    if k == "o2o":
        _need(args, "cnf")
        net, _, _ = gen.gen_o2o(_read_cnf(args.cnf))
    elif k == "mroett":
        _need(args, "cnf")
        try:
            net, _ = gen.gen_mroett(_read_cnf(args.cnf), args.K, args.M, args.node_limit)
        except gen.GadgetTooLarge as exc:
            return _fail(EXIT_USAGE, str(exc), sizes=exc.sizes, limit=exc.limit)
    elif k == "sym":
        _need(args, "cnf")
        net, _ = gen.gen_sym(_read_cnf(args.cnf), args.L, args.l)
    elif k == "hard-family":
        _need(args, "r")
        if args.r <= 3:
            raise UsageError("--r must be at least 4")
        net, _ = gen.gen_hard_family(args.r)
    elif k == "gap-ssmrtt":
        base, s, t = _base(args)
        _need(args, "eps")
        if not 0 < args.eps < 1:
            raise UsageError("--eps must lie in (0, 1)")
        if s == t:
            raise UsageError("--s and --t must differ")
        net, _, _ = gen.gen_ssmrtt_gap(base, s, t, args.eps)
    elif k == "gap-simple":
        base, s, t = _base(args)
        net, _ = gen.gen_simple_gaps(base, s, t, args.variant, args.K, args.c,
                                     0.5 if args.eps is None else args.eps)
    elif k == "gap-sqrtn":
        base, s, t = _base(args)
        if s == t:
            raise UsageError("--s and --t must differ")
        net, _ = gen.gen_sqrtn_gap(base, s, t)
    else:  # random-sym
        _need(args, "n")
        if args.n < 2 or (args.pairs is not None and args.pairs < 1):
            raise UsageError("random-sym needs --n >= 2 and --pairs >= 1")
        net = gen.gen_random_symmetric(args.n, args.pairs, args.seed)
    doc = io.network_to_doc(net)
    if args.output:
        io.write_text(args.output, io.canonical(doc))
        _emit({"generator": k, "nodes": net.node_count, "trips": net.trip_count,
               "edges": len(net.edges), "output": args.output, "seed": args.seed,
               "paper_params": net.meta.get("paper_params"), "thresholds": net.meta.get("thresholds")})
    else:
        _emit(doc)
    return EXIT_OK


# ---------------------------------------------------------------- eval

def _assignment(args, net):
    given = [x for x in (args.schedule, args.weak, args.tau) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --schedule, --weak, --tau")
    if args.schedule:
        a = io.schedule_from_doc(io.read_json(args.schedule))
    elif args.weak:
        a = io.weak_from_doc(io.read_json(args.weak))
    else:
        a = io.temporalisation_from_doc(io.read_json(args.tau))
    if isinstance(a, (Schedule, WeakSchedule)):
        return schedule_to_temporalisation(net, a)
    if len(a.starts) != net.trip_count:
        raise NetworkError(f"temporalisation has {len(a.starts)} starts, network has {net.trip_count} trips")
    return a


def cmd_eval(args) -> int:
    net = io.load_network(args.network)
    tau = _assignment(args, net)
    srcs = _node_list(net, args.subtotal_sources) if args.subtotal_sources else None
    rep = reach_report(net, tau, want_sets=args.sets, subtotal_sources=srcs)
    _write_or_emit(args, rep.to_json())
    return EXIT_OK


# ---------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    net = io.load_network(args.network)
    alg = args.alg
    doc: dict = {"alg": alg, "seed": args.seed}
    code = EXIT_OK
    if alg in ("brute-sched", "brute-weak", "brute-grid"):
        mode = {"brute-sched": "perm", "brute-weak": "weak", "brute-grid": "grid"}[alg]
        source = _node(net, args.source) if args.source is not None else None
        res = exact_best(net, mode, args.horizon, args.cap, source, args.threads)
        doc.update(value=res.value, assignment=io.assignment_to_doc(res.assignment),
                   witness=None, stats={"explored": res.explored, "trials": 0})
        if source is not None:
            doc["source"] = source
        elapsed = res.elapsed_ms
    elif alg == "sym-approx":
        res = symmetric_approx_schedule(net)
        doc.update(value=res.report.total, assignment=io.assignment_to_doc(res.schedule),
                   witness=None, bound=res.bound,
                   stats={"explored": len(res.tree.pairs), "trials": 0})
        elapsed = 0.0
    elif alg in ("fpt", "oracle"):
        if args.s is None or args.t is None:
            raise UsageError(f"--alg {alg} requires --s and --t")
        s, t = _node(net, args.s), _node(net, args.t)
        if alg == "fpt":
            if args.k is None:
                raise UsageError("--alg fpt requires --k")
            r = fpt_o2o(net, s, t, args.k, args.mode, args.trials, args.seed, budget=args.cap)
            ok, w, stats = r.decision, r.witness, {"explored": r.explored, "trials": r.trials}
            doc["mode"] = args.mode
        else:
            r = o2o_oracle(net, s, t, k_cap=args.k, max_states=args.cap)
            ok, w, stats = r.feasible, r.witness, {"explored": r.explored, "trials": 0}
        doc.update(value=int(ok), feasible=ok, stats=stats,
                   witness=w.to_json() if w else None,
                   assignment=io.assignment_to_doc(witness_to_schedule(net, w)) if w else None)
        code = EXIT_OK if ok else EXIT_REFUSED
        elapsed = 0.0
    else:  # argparse restricts choices
        raise UsageError(f"unknown --alg {alg}")
    if args.timing:
        doc["stats"]["elapsed_ms"] = round(elapsed, 3)
    _write_or_emit(args, doc)
    return code


# ---------------------------------------------------------------- check

def _static_gap(net):
    gap = unreachable_certificate([set(r) for r in static_reach_sets(net)], net.node_count)
    return list(gap) if gap else None


def cmd_check(args) -> int:
    net = io.load_network(args.network)
    prop = args.prop
    if prop == "symmetric":
        p = symmetric_pairing(net)
        value = bool(p)
        cert = [list(x) for x in p.pairs] if value else {"unpaired_trip": p.witness}
        method = "pairing"
    elif prop == "strongly-connected":
        value = strongly_connected(net)
        cert = None if value else _static_gap(net)
        method = "static closure"
    elif prop == "one-edge":
        value = is_one_edge(net)
        cert = None if value else {"trip": next(i for i, t in enumerate(net.trips) if len(t) != 1)}
        method = "trip lengths"
    else:
        r = strongly_temporalisable_check(net, max_states=args.cap)
        value, cert, method = r.value, list(r.certificate) if r.certificate else None, r.method
    _write_or_emit(args, {"prop": prop, "value": value, "certificate": cert, "method": method})
    return EXIT_OK if value else EXIT_REFUSED


# ---------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    net = io.load_network(args.network)
    opts = {"samples": args.samples, "seed": args.seed, "threads": args.threads}
    if args.cap is not None:
        opts["cap"] = args.cap
    if args.assignment:
        bits = args.assignment.strip()
        if set(bits) - {"0", "1"}:
            raise UsageError("--assignment must be a 0/1 string, one character per variable")
        opts["assignment"] = tuple(c == "1" for c in bits)
    checks = verify_instance(net, **opts)
    ok = all(c.ok is not False for c in checks)
    _write_or_emit(args, {"generator": net.meta["generator"], "seed": args.seed, "ok": ok,
                          "checks": [c.to_json() for c in checks]})
    return EXIT_OK if ok else EXIT_REFUSED


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="triptemp", description="Trip temporalisation toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("-o", "--output", help="also write the payload to this file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("kind", choices=["o2o", "mroett", "sym", "hard-family", "gap-ssmrtt",
                                    "gap-simple", "gap-sqrtn", "random-sym"])
    common(g)
    g.add_argument("--cnf")
    g.add_argument("--r", type=int)
    g.add_argument("--base")
    g.add_argument("--s")
    g.add_argument("--t")
    g.add_argument("--eps", type=float)
    g.add_argument("--K", type=int)
    g.add_argument("--M", type=int)
    g.add_argument("--L", type=int)
    g.add_argument("--l", type=int)
    g.add_argument("--c", type=float, default=1.0)
    g.add_argument("--variant", choices=["mrtt", "ssmrtt"], default="mrtt")
    g.add_argument("--n", type=int)
    g.add_argument("--pairs", type=int)
    g.add_argument("--node-limit", type=int, default=gen.DEFAULT_NODE_LIMIT)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="evaluate reachability under an assignment")
    e.add_argument("network")
    common(e)
    e.add_argument("--schedule")
    e.add_argument("--weak")
    e.add_argument("--tau")
    e.add_argument("--sets", action="store_true")
    e.add_argument("--subtotal-sources", help="comma-separated node indices or labels")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("solve", help="run a solver")
    s.add_argument("network")
    common(s)
    s.add_argument("--alg", required=True,
                   choices=["brute-sched", "brute-weak", "brute-grid", "sym-approx", "fpt", "oracle"])
    s.add_argument("--s")
    s.add_argument("--t")
    s.add_argument("--k", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--mode", choices=["random", "exhaustive", "oracle"], default="random")
    s.add_argument("--horizon", type=int)
    s.add_argument("--cap", type=int)
    s.add_argument("--source", help="maximise reach from this node only")
    s.add_argument("--timing", action="store_true", help="include elapsed_ms in stats")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="decide a structural property")
    c.add_argument("network")
    common(c)
    c.add_argument("--prop", required=True,
                   choices=["symmetric", "strongly-connected", "one-edge", "strongly-temporalisable"])
    c.add_argument("--cap", type=int)
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("verify", help="run generator-specific checks")
    v.add_argument("network")
    common(v)
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--cap", type=int)
    v.add_argument("--assignment", help="0/1 string for SAT-reduction instances")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, str(exc))
    except gen.FormulaError as exc:
        return _fail(EXIT_REFUSED, f"formula: {exc}")
    except CapExceeded as exc:
        return _fail(EXIT_USAGE, str(exc), required=exc.required, cap=exc.cap)
    except MissingMetadata as exc:
        return _fail(EXIT_USAGE, str(exc))
    except (io.FormatError, NetworkError) as exc:
        return _fail(EXIT_USAGE, str(exc))
    except SolveError as exc:
        return _fail(EXIT_REFUSED, str(exc))
    except (ValueError, IndexError) as exc:
        return _fail(EXIT_USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
