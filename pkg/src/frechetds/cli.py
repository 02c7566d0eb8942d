"""Command-line interface (``frechetds``).

Exit codes: 0 ok, 1 validation failure, 2 input error, 3 budget refusal.
Reports go to stdout as JSON.
"""

import argparse
import json
import secrets
import sys
import time

import numpy as np

from . import kernels
from .ann import AnnIndex, DeterministicAnnIndex, partition
from .errors import BudgetExceeded, InputError
from .fileio import file_digest, parse_stream, parse_trajectories
from .geometry import discrete_frechet, tolerance
from .oracle import DEFAULT_BUDGET, DistanceOracle, build_oracle
from .simplify import gonzalez_simplify, stream_simplify
from .streaming import StreamConfig, StreamingOracle

OK, VALIDATION_FAILED, INPUT_ERROR, BUDGET_REFUSED = 0, 1, 2, 3


class ValidationFailed(Exception):
    pass


def _emit(obj, out):
    out.write(json.dumps(obj) + "\n")


def _check(truth, est, eps, tol):
    ratio = est / truth if truth > 0 else (1.0 if est <= tol else float("inf"))
    ok = truth - tol <= est <= (1 + eps) * (1 + 1e-9) * truth + tol
    return ratio, ok


def _select(records, ident, path):
    if not records:
        raise InputError(f"{path}: no trajectories")
    if ident is None:
        return records[0]
    for r in records:
        if r.id == ident:
            return r
    raise InputError(f"{path}: no trajectory with id {ident!r}")


def _parse_s(value):
    return "log" if value in (None, "log") else float(value)


# -- commands -----------------------------------------------------------------------


def cmd_dist(args, out):
    a, b = parse_trajectories(args.a), parse_trajectories(args.b)
    if not a or not b:
        raise InputError("both files need at least one trajectory")
    if len(a) == len(b):
        pairs = list(zip(a, b))
    elif len(a) == 1 or len(b) == 1:
        pairs = [(x, y) for x in a for y in b]
    else:
        raise InputError(f"record counts differ ({len(a)} vs {len(b)}) and neither file has exactly one")
    rows = [{"a": x.id, "b": y.id, "distance": discrete_frechet(x.points, y.points)} for x, y in pairs]
    _emit({"command": "dist", "pairs": rows}, out)


def cmd_simplify(args, out):
    for r in parse_trajectories(args.input):
        if args.algo == "stream":
            res = stream_simplify(r.points, args.k)
            row = {"id": r.id, "vertices": res.vertices.tolist(), "bound": res.bound, "intervals": res.raw_intervals}
        else:
            res = gonzalez_simplify(r.points, args.k)
            row = {"id": r.id, "vertices": res.vertices.tolist(), "bound": res.bound, "intervals": res.intervals}
        row["distance"] = discrete_frechet(r.points, row["vertices"])
        _emit(row, out)


def cmd_oracle_build(args, out):
    rec = _select(parse_trajectories(args.input), args.id, args.input)
    mode = "lazy" if args.lazy else "eager"
    t0 = time.perf_counter()
    o = build_oracle(rec.points, args.k, args.eps, alpha=args.alpha, mode=mode, budget=args.budget)
    data = o.to_dict(source=rec.points if args.lazy else None)
    data["input_ref"] = {"path": args.input, "id": rec.id, "sha256": file_digest(args.input)}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
    _emit(
        {
            "command": "oracle build",
            "mode": mode,
            "id": rec.id,
            "points": len(rec.points),
            "simplification_vertices": len(o.xk),
            "grid_points": o.n_points,
            "table_entries": o.table_entries,
            "table_size_estimate": o.table_size_estimate(),
            "seconds": time.perf_counter() - t0,
        },
        out,
    )


def _oracle_truth_curve(data, override):
    ref = data.get("input_ref", {})
    path = override or ref.get("path")
    if path is None:
        raise InputError("--validate needs the original input (--input)")
    return _select(parse_trajectories(path), ref.get("id"), path).points


def cmd_oracle_query(args, out):
    with open(args.oracle, encoding="utf-8") as fh:
        data = json.load(fh)
    o = DistanceOracle.from_dict(data)
    X = _oracle_truth_curve(data, args.input) if args.validate else None
    rows, failed = [], 0
    for q in parse_trajectories(args.queries):
        row = {"id": q.id, "estimate": o.query(q.points)}
        if X is not None:
            truth = discrete_frechet(q.points, X)
            ratio, ok = _check(truth, row["estimate"], o.eps, tolerance(X, q.points))
            row.update(truth=truth, ratio=ratio, ok=ok)
            failed += not ok
        rows.append(row)
    report = {"command": "oracle query", "epsilon": o.eps, "rows": rows, "stats": o.stats}
    if X is not None:
        report["verdict"] = "pass" if not failed else "fail"
    _emit(report, out)
    if failed:
        raise ValidationFailed(f"{failed} estimate(s) outside the (1+eps) sandwich")


def _stream_config(args):
    return StreamConfig(
        k=args.k,
        epsilon=args.eps,
        s=_parse_s(args.s),
        m_hint=args.known_m,
        block_size=args.block,
        mode=args.mode,
        budget=args.budget,
    )


def cmd_stream(args, out):
    items = list(args.items)
    finalize = items[0] == "finalize"
    if finalize:
        items = items[1:]
    if len(items) != 1:
        raise InputError("usage: stream [finalize] REPLAY_FILE")
    cfg = _stream_config(args)
    if finalize and not cfg.known_length:
        raise InputError("stream finalize needs --known-m")
    if finalize and args.out and cfg.mode != "eager":
        raise InputError("saving a finalized oracle needs --mode eager (lazy tables fill from in-memory children)")
    so = StreamingOracle(cfg)
    seen = [] if (args.validate or finalize) else None
    pending, failed, n_queries = [], 0, 0
    t0 = time.perf_counter()

    def answer(q, est, X):
        nonlocal failed, n_queries
        n_queries += 1
        row = {"query": n_queries, "points_read": len(X) if X is not None else so.points_read, "estimate": est}
        if args.validate:
            truth = discrete_frechet(q, X)
            ratio, ok = _check(truth, est, cfg.epsilon, tolerance(X, q))
            row.update(truth=truth, ratio=ratio, ok=ok)
            failed += not ok
        _emit(row, out)

    for kind, value in parse_stream(items[0]):
        if kind == "point":
            so.read(value)
            if seen is not None:
                seen.append(value)
        elif not args.queries_inline:
            continue
        elif finalize:
            pending.append(value)
        else:
            answer(value, so.query(value), np.array(seen) if seen is not None else None)
    stats = so.stats()
    if finalize:
        o = so.finalize()
        X = np.array(seen)
        for q in pending:
            answer(q, o.query(q), X)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(o.to_dict(), fh)
        stats["final_table_entries"] = o.table_entries
    stats |= {"seconds": time.perf_counter() - t0, "queries": n_queries}
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            params = {k: v for k, v in vars(args).items() if k != "func"}
            json.dump({"command": "stream", "params": params, "stats": stats, "failed": failed}, fh)
    if failed:
        raise ValidationFailed(f"{failed} streaming estimate(s) outside the (1+eps) sandwich")


def cmd_ann_build(args, out):
    records = parse_trajectories(args.input)
    curves = [r.points for r in records]
    ref = {"path": args.input, "sha256": file_digest(args.input)}
    t0 = time.perf_counter()
    if args.deterministic:
        idx = DeterministicAnnIndex(curves, args.k, args.eps, r=args.r)
        data = idx.to_dict(corpus_ref=ref)
        info = {"shifts": len(idx.shifts)}
    else:
        seed = args.seed if args.seed is not None else secrets.randbits(63)
        idx = AnnIndex(curves, args.k, args.eps, r=args.r, seed=seed)
        data = {"format": "frechetds.ann.randomized", "version": 1, "k": args.k, "epsilon": args.eps,
                "r": args.r, "seed": seed, "corpus": ref}
        info = {"seed": seed, "z": idx.z, "buckets": len(idx.buckets.keys)}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
    _emit({"command": "ann build", "curves": len(curves), "seconds": time.perf_counter() - t0} | info, out)


def _load_ann(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    ref = data.get("corpus") or {}
    if "path" not in ref:
        raise InputError("index does not reference its corpus")
    if file_digest(ref["path"]) != ref.get("sha256"):
        raise InputError(f"corpus {ref['path']} changed since the index was built")
    records = parse_trajectories(ref["path"])
    curves = [r.points for r in records]
    if data.get("format") == "frechetds.ann.deterministic":
        return DeterministicAnnIndex.from_dict(data, curves), records
    if data.get("format") == "frechetds.ann.randomized":
        return AnnIndex(curves, data["k"], data["epsilon"], r=data["r"], seed=data["seed"]), records
    raise InputError("not a serialised ANN index")


def cmd_ann_query(args, out):
    idx, records = _load_ann(args.index)
    rows, failed, missed = [], 0, 0
    for q in parse_trajectories(args.queries):
        a = idx.query(q.points)
        row = {"id": q.id, "answer": "none" if a is None else records[a].id}
        if args.validate:
            nearest = min(discrete_frechet(q.points, r.points) for r in records)
            row["nearest"] = nearest
            if a is not None:
                dist = discrete_frechet(q.points, records[a].points)
                ok = dist <= (1 + idx.eps) * idx.r * (1 + 1e-9)
                row.update(distance=dist, ok=ok)
                failed += not ok
            elif nearest <= idx.r:
                missed += 1
        rows.append(row)
    report = {"command": "ann query", "rows": rows, "stats": idx.stats}
    if args.validate:
        report.update(verdict="pass" if not failed else "fail", missed_near_neighbours=missed)
    _emit(report, out)
    if failed:
        raise ValidationFailed(f"{failed} answer(s) farther than (1+eps) r")


def cmd_partition(args, out):
    records = parse_trajectories(args.input)
    if args.curves:
        items, metric = [r.points for r in records], discrete_frechet
        labels = [r.id for r in records]
    else:
        items, metric = np.concatenate([r.points for r in records]), None
        labels = [f"{r.id}:{i}" for r in records for i in range(len(r.points))]
    res = partition(items, args.delta, seed=args.seed, metric=metric)
    _emit(
        {
            "command": "partition",
            "R": res.R,
            "permutation": [labels[i] for i in res.permutation],
            "clusters": [[labels[i] for i in c] for c in res.clusters()],
        },
        out,
    )


def _bench_queries(rng, X, k, n):
    out = []
    for _ in range(n):
        L = rng.integers(1, k + 1)
        out.append(X[rng.integers(0, len(X), size=L)] + rng.normal(size=(L, X.shape[1])) * rng.choice([0.1, 1, 5]))
    return out


def cmd_bench(args, out):
    rng = np.random.default_rng(args.seed)
    if args.input:
        X = _select(parse_trajectories(args.input), args.id, args.input).points
    else:
        X = rng.normal(size=(args.m, args.dim)).cumsum(axis=0)
    cells, failed = [], 0
    for k in args.k:
        for eps in args.eps:
            Q = _bench_queries(rng, X, k, args.queries)
            truths = [discrete_frechet(q, X) for q in Q]
            for kind in ["static"] + (["stream"] if args.stream else []):
                t0 = time.perf_counter()
                if kind == "static":
                    o = build_oracle(X, k, eps)
                    build = time.perf_counter() - t0
                    answer = o.query
                else:
                    so = StreamingOracle(StreamConfig(k, eps, m_hint=len(X))).extend(X)
                    build = time.perf_counter() - t0
                    answer = so.query
                t1 = time.perf_counter()
                rows = []
                for q, truth in zip(Q, truths):
                    est = answer(q)
                    ratio, ok = _check(truth, est, eps, tolerance(X, q))
                    rows.append({"truth": truth, "estimate": est, "ratio": ratio, "ok": ok})
                qtime = time.perf_counter() - t1
                memory = (
                    {"table_entries": o.table_entries, "grid_points": o.n_points}
                    if kind == "static"
                    else {k_: v for k_, v in so.stats().items() if k_ in ("stack", "store", "memory_proxy")}
                )
                bad = sum(not r["ok"] for r in rows)
                failed += bad
                cells.append(
                    {
                        "kind": kind,
                        "params": {"k": k, "epsilon": eps, "m": len(X), "d": X.shape[1]},
                        "build_seconds": build,
                        "query_seconds": qtime,
                        "memory": memory,
                        "max_ratio": max(r["ratio"] for r in rows) if rows else None,
                        "verdict": "pass" if not bad else "fail",
                        "rows": rows if args.rows else None,
                    }
                )
    _emit({"command": "bench", "backend": kernels.BACKEND, "seed": args.seed, "cells": cells}, out)
    if failed:
        raise ValidationFailed(f"{failed} benchmark estimate(s) outside the sandwich")


# -- parser -------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="frechetds", description="Discrete Frechet distance oracles and indices.")
    p.add_argument("--backend", choices=["cython", "python"], help="force a DP kernel backend")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", help="exact discrete Frechet distance between trajectories")
    d.add_argument("a")
    d.add_argument("b")
    d.set_defaults(func=cmd_dist)

    s = sub.add_parser("simplify", help="k-simplification of every trajectory")
    s.add_argument("input")
    s.add_argument("--algo", choices=["stream", "gonzalez"], default="stream")
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_simplify)

    o = sub.add_parser("oracle", help="static distance oracle")
    osub = o.add_subparsers(dest="action", required=True)
    ob = osub.add_parser("build")
    ob.add_argument("input")
    ob.add_argument("--id")
    ob.add_argument("--k", type=int, required=True)
    ob.add_argument("--eps", type=float, required=True)
    ob.add_argument("--alpha", type=float, default=8)
    ob.add_argument("--lazy", action="store_true", help="fill the table on demand (stores the input)")
    ob.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    ob.add_argument("--out", required=True)
    ob.set_defaults(func=cmd_oracle_build)
    oq = osub.add_parser("query")
    oq.add_argument("--oracle", required=True)
    oq.add_argument("--queries", required=True)
    oq.add_argument("--validate", action="store_true")
    oq.add_argument("--input", help="trajectory file for validation (default: the one used at build)")
    oq.set_defaults(func=cmd_oracle_query)

    st = sub.add_parser("stream", help="replay a stream; 'stream finalize FILE' writes a one-pass oracle")
    st.add_argument("items", nargs="+", metavar="[finalize] REPLAY")
    st.add_argument("--k", type=int, required=True)
    st.add_argument("--eps", type=float, required=True)
    st.add_argument("--s", default="log", help="tradeoff parameter, a number > 1 or 'log'")
    st.add_argument("--known-m", type=int, dest="known_m")
    st.add_argument("--block", type=int)
    st.add_argument("--mode", choices=["lazy", "eager"], default="lazy")
    st.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    st.add_argument("--queries-inline", dest="queries_inline", action="store_true", default=True)
    st.add_argument("--no-queries", dest="queries_inline", action="store_false")
    st.add_argument("--validate", action="store_true")
    st.add_argument("--report")
    st.add_argument("--out", help="output file for 'stream finalize'")
    st.set_defaults(func=cmd_stream)

    a = sub.add_parser("ann", help="approximate near-neighbour index")
    asub = a.add_subparsers(dest="action", required=True)
    ab = asub.add_parser("build")
    ab.add_argument("input")
    ab.add_argument("--k", type=int, required=True)
    ab.add_argument("--eps", type=float, required=True)
    ab.add_argument("--r", type=float, default=1.0)
    ab.add_argument("--deterministic", action="store_true")
    ab.add_argument("--seed", type=int)
    ab.add_argument("--out", required=True)
    ab.set_defaults(func=cmd_ann_build)
    aq = asub.add_parser("query")
    aq.add_argument("--index", required=True)
    aq.add_argument("--queries", required=True)
    aq.add_argument("--validate", action="store_true")
    aq.set_defaults(func=cmd_ann_query)

    pa = sub.add_parser("partition", help="random ball-carving partition")
    pa.add_argument("input")
    pa.add_argument("--delta", type=float, required=True)
    pa.add_argument("--seed", type=int, required=True)
    pa.add_argument("--curves", action="store_true", help="partition whole curves under the Frechet distance")
    pa.set_defaults(func=cmd_partition)

    b = sub.add_parser("bench", help="parameter sweep with exact validation")
    b.add_argument("--input")
    b.add_argument("--id")
    b.add_argument("--m", type=int, default=1000)
    b.add_argument("--dim", type=int, default=2)
    b.add_argument("--k", type=int, nargs="+", default=[2, 3])
    b.add_argument("--eps", type=float, nargs="+", default=[0.5, 0.25])
    b.add_argument("--queries", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--stream", action="store_true", help="also benchmark the streaming oracle")
    b.add_argument("--rows", action="store_true", help="include per-query rows")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        if args.backend:
            kernels.use_backend(args.backend)
        args.func(args, out)
    except ValidationFailed as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return VALIDATION_FAILED
    except BudgetExceeded as exc:
        print(f"budget refused: {exc} (estimate {exc.estimate:.6g})", file=sys.stderr)
        return BUDGET_REFUSED
    except (ValueError, OSError) as exc:  # InputError and OutOfRange included
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    return OK


if __name__ == "__main__":
    sys.exit(main())
