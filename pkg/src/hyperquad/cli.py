"""``hyperquad`` command line: gen, validate, table1, bench.

Exit codes: 0 success, 1 a checked criterion failed, 2 bad usage or input.
Reports are JSON, written in full or not at all.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
import time

import numpy as np

from . import __version__
from .geometry import Point, distance
from .io import PointFileError, format_points, read_points, write_report
from .nnindex import NeighborIndex, brute_force_closest_pair, estimate_delta, max_delta
from .quadtree import table1
from .sampling import ball_point, sample_ball, sample_box
from .validation import (
    covering_sweep,
    frozen_constants,
    nearest_ratios,
    query_scaling,
    summarize,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a {kind.__name__}: {text!r}") from None
        if not v > 0 or (kind is float and not math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v

    return parse


def _non_negative_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an int: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperquad", description="Hyperbolic quadtrees and L-order neighbour search.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a random point file")
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--n", type=_positive(int), required=True)
    gen.add_argument("--mode", choices=("ball", "box"), default="ball")
    gen.add_argument("--radius", type=_positive(float), default=3.0, help="ball radius")
    gen.add_argument("--width", type=_positive(float), default=1.0, help="box width")
    gen.add_argument("--height", type=_positive(float), default=1.0, help="box height, as log2 of the top")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default="-")

    val = sub.add_parser("validate", help="compare the index with brute force")
    val.add_argument("pointfile")
    val.add_argument("--delta", type=_positive(float))
    val.add_argument("--queries", type=_non_negative_int, default=200)
    val.add_argument("--pairs", type=_non_negative_int, default=1000, help="covering-ratio sample size")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--out", default="-")

    tab = sub.add_parser("table1", help="child/parent diameter ratios")
    tab.add_argument("--out", default="-")

    bench = sub.add_parser("bench", help="build time and operation latencies")
    bench.add_argument("pointfile")
    bench.add_argument("--delta", type=_positive(float))
    bench.add_argument("--ops", type=_non_negative_int, default=1000, help="random insert/remove/query operations")
    bench.add_argument("--queries", type=_positive(int), default=100, help="queries per size in the scaling fit")
    bench.add_argument("--scale-max", type=int, default=17, help="largest log2 n of the scaling fit (0 skips it)")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", default="-")
    return parser


# -- gen ------------------------------------------------------------------


def cmd_gen(args) -> tuple[int, str]:
    if args.dim < 2:
        raise UsageError("--dim must be at least 2")
    rng = np.random.default_rng(args.seed)
    try:
        if args.mode == "ball":
            pts = sample_ball(rng, args.n, args.dim, args.radius)
        else:
            pts = sample_box(rng, args.n, args.dim, args.width, args.height)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    head, _, body = format_points(pts, args.dim).partition("\n")
    return EXIT_OK, f"{head}\n# mode={args.mode} seed={args.seed}\n{body}"


# -- validate ---------------------------------------------------------------


def _nearest_threshold(d: int) -> float:
    consts = frozen_constants()
    pinned = consts["nearest_ratio"].get(str(d))
    if pinned is not None:
        return float(pinned)
    return consts["covering_ratio_over_d_sqrt_d"] * d * math.sqrt(d)


def _criterion(value, threshold, ok) -> dict:
    return {"value": value, "threshold": threshold, "pass": bool(ok)}


def cmd_validate(args) -> tuple[int, dict]:
    d, pts = read_points(args.pointfile)
    if len(pts) < 2:
        raise PointFileError("validate needs at least two points")
    if len({p.coords for p in pts}) != len(pts):
        raise PointFileError("duplicate points")
    delta = args.delta if args.delta is not None else estimate_delta(pts, args.seed)
    if delta > max_delta(d):
        raise UsageError(f"--delta must be at most {max_delta(d):.6g} in dimension {d}")
    rng = np.random.default_rng(args.seed)

    t0 = time.perf_counter_ns()
    index = NeighborIndex.build(pts, delta)
    build_ns = time.perf_counter_ns() - t0

    # queries: ball samples around random data points
    qr = min(delta, 1.0)
    queries = []
    for _ in range(args.queries):
        c = pts[int(rng.integers(len(pts)))]
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        queries.append(ball_point(u, qr * float(rng.random()), c))
    times = []
    for q in queries:
        t = time.perf_counter_ns()
        index.nearest(q)
        times.append(time.perf_counter_ns() - t)
    ratios = nearest_ratios(index, pts, queries)

    a, b = index.closest_pair()
    c, e = brute_force_closest_pair(pts)
    cp_ratio = distance(a, b) / distance(c, e)

    cover = covering_sweep([d], [delta], args.pairs, args.seed)[0] if args.pairs else None

    consts = frozen_constants()
    k_nn = _nearest_threshold(d)
    k_cp = float(consts["closest_pair_ratio"])
    k_cov = float(consts["covering_ratio_over_d_sqrt_d"])
    nn = summarize(ratios)
    criteria = {
        "nearest_sound": _criterion(nn.get("min"), 1.0, not ratios or min(ratios) >= 1.0),
        "nearest_ratio": _criterion(nn.get("max"), k_nn, not ratios or max(ratios) <= k_nn),
        "closest_pair_ratio": _criterion(cp_ratio, k_cp, 1.0 <= cp_ratio <= k_cp),
    }
    if cover is not None:
        criteria["covering_ratio"] = _criterion(
            cover["max_ratio_over_d_sqrt_d"],
            k_cov,
            cover["infinite"] == 0 and cover["max_ratio_over_d_sqrt_d"] <= k_cov,
        )
    passed = all(c["pass"] for c in criteria.values())
    report = {
        "command": "validate",
        "parameters": {
            "pointfile": args.pointfile,
            "d": d,
            "n": len(pts),
            "delta": delta,
            "seed": args.seed,
            "queries": args.queries,
            "query_radius": qr,
            "pairs": args.pairs,
        },
        "metrics": {
            "build_ns": build_ns,
            "query_ns_p50": float(np.quantile(times, 0.5)) if times else None,
            "query_ns_p99": float(np.quantile(times, 0.99)) if times else None,
            "max_ratio": nn.get("max"),
            "mean_ratio": nn.get("mean"),
            "nearest_ratio": nn,
            "closest_pair": {
                "found": [list(a.coords), list(b.coords)],
                "exact": [list(c.coords), list(e.coords)],
                "ratio": cp_ratio,
            },
            "covering": cover,
            "shift_level": index.family.L,
            "orders": len(index.orders),
        },
        "criteria": criteria,
        "pass": passed,
    }
    return (EXIT_OK if passed else EXIT_FAIL), report


# -- table1 -----------------------------------------------------------------


def cmd_table1(args) -> tuple[int, dict]:
    rows = table1()
    passed = all(r["pass"] for r in rows)
    report = {
        "command": "table1",
        "parameters": {},
        "metrics": {"table1": rows},
        "criteria": {
            f"level={r['level']} alpha={r['alpha']:.6g} alpha_child={r['alpha_child']:.6g}": _criterion(
                r["computed"], r["expected"], r["pass"]
            )
            for r in rows
        },
        "pass": passed,
    }
    return (EXIT_OK if passed else EXIT_FAIL), report


# -- bench ------------------------------------------------------------------


def _op_sequence(rng: np.random.Generator, pts: list[Point], ops: int, d: int):
    """Deterministic mix of inserts, removes and queries."""
    present = list(pts)
    seen = {p.coords for p in pts}
    out = []
    for _ in range(ops):
        kind = ("insert", "remove", "query")[int(rng.integers(3))]
        if kind == "remove" and len(present) <= 1:
            kind = "insert"
        c = present[int(rng.integers(len(present)))]
        if kind == "remove":
            j = int(rng.integers(len(present)))
            present[j], present[-1] = present[-1], present[j]
            p = present.pop()
            seen.discard(p.coords)
            out.append((kind, p))
            continue
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        p = ball_point(u, float(rng.random()), c)
        if kind == "insert":
            if p.coords in seen:
                continue
            seen.add(p.coords)
            present.append(p)
        out.append((kind, p))
    return out


def cmd_bench(args) -> tuple[int, dict]:
    d, pts = read_points(args.pointfile)
    if not pts:
        raise PointFileError("bench needs at least one point")
    if len({p.coords for p in pts}) != len(pts):
        raise PointFileError("duplicate points")
    delta = args.delta if args.delta is not None else estimate_delta(pts, args.seed)
    if delta > max_delta(d):
        raise UsageError(f"--delta must be at most {max_delta(d):.6g} in dimension {d}")
    t0 = time.perf_counter_ns()
    index = NeighborIndex.build(pts, delta)
    metrics: dict = {"build_ns": time.perf_counter_ns() - t0}
    if args.ops:
        rng = np.random.default_rng(args.seed)
        latency: dict[str, list[int]] = {"insert": [], "remove": [], "query": []}
        for kind, p in _op_sequence(rng, pts, args.ops, d):
            t = time.perf_counter_ns()
            if kind == "insert":
                index.insert(p)
            elif kind == "remove":
                index.remove(p)
            else:
                index.nearest(p)
            latency[kind].append(time.perf_counter_ns() - t)
        metrics["operations"] = {
            kind: {"count": len(v), **({"ns_p50": float(np.quantile(v, 0.5)), "ns_p99": float(np.quantile(v, 0.99))} if v else {})}
            for kind, v in latency.items()
        }
        if args.scale_max >= 10:
            metrics["scaling"] = query_scaling(d, range(10, args.scale_max + 1), args.queries, args.seed, delta)
    report = {
        "command": "bench",
        "parameters": {
            "pointfile": args.pointfile,
            "d": d,
            "n": len(pts),
            "delta": delta,
            "seed": args.seed,
            "ops": args.ops,
            "queries": args.queries,
            "scale_max": args.scale_max,
        },
        "metrics": metrics,
        "pass": True,
    }
    return EXIT_OK, report


# -- entry point --------------------------------------------------------------


_COMMANDS = {"gen": cmd_gen, "validate": cmd_validate, "table1": cmd_table1, "bench": cmd_bench}


def _emit(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, result = _COMMANDS[args.command](args)
    except (UsageError, PointFileError) as exc:
        print(f"hyperquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(result, dict):
        buf = io.StringIO()
        write_report(buf, result)
        result = buf.getvalue()
    try:
        _emit(args.out, result)
    except OSError as exc:
        print(f"hyperquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
