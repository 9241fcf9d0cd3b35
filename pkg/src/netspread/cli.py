"""Command-line front end: one binary, flag-driven subcommands.

Subcommands: gen, estimate, estimate-inf, lt-estimate, mc, oracle, compare,
certify, bracket, bench, accuracy.  Randomized subcommands take an explicit
--seed (default 0, never wall-clock).  Exit codes: 0 success, 1 input error,
2 internal invariant violation (e.g. the cascade bound broken beyond Monte-
Carlo noise in `compare`).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .bounds import exactness_certificate, spanning_tree_lower_bound
from .dmp_ic import FixedPointConfig, dmp_est, dmp_inf
from .dmp_lt import DEFAULT_DEGREE_CAP, LtParameters, lt_estimate
from .errors import InputError, InvariantViolation
from .generators import GenSpec, generate, random_seed_set
from .graphs import (InitialCondition, parse_graph, parse_initial_condition,
                     parse_node_values, serialize_graph)
from .montecarlo import delta_p, ic_mc_marginals, lt_mc_marginals
from .oracle import exact_cavity_messages, exact_marginals

DEFAULT_SEED = 0

BENCH_SIZES = (10_000, 30_000, 100_000, 300_000, 1_000_000)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write_out(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_graph(args):
    return parse_graph(_read(args.graph), mode=getattr(args, "mode", None))


def _load_init(args, graph):
    if getattr(args, "init", None):
        return parse_initial_condition(_read(args.init), graph)
    return InitialCondition.zeros(graph.node_count)


def _load_lt_params(args, graph):
    theta = parse_node_values(_read(args.theta_file), graph, 0.5, what="theta") \
        if args.theta_file else np.full(graph.node_count, 0.5)
    eta = parse_node_values(_read(args.eta_file), graph, 1.0, what="eta") \
        if args.eta_file else np.ones(graph.node_count)
    return LtParameters(theta, eta).check_against(graph)


def _horizon_from(args):
    if getattr(args, "inf", False):
        if getattr(args, "horizon", None) is not None:
            raise InputError("give either --horizon or --inf, not both")
        return math.inf
    if getattr(args, "horizon", None) is None:
        raise InputError("a horizon is required (--horizon N or --inf)")
    return args.horizon


def _parse_b_spec(text):
    parts = text.split(":")
    try:
        if parts[0] == "const" and len(parts) == 2:
            return ("const", float(parts[1]))
        if parts[0] == "uniform" and len(parts) == 3:
            return ("uniform", float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise InputError(f"bad b spec {text!r}: use const:<c> or uniform:<lo>:<hi>")


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, np.ndarray):
        return [float(x) for x in value]
    return value


def _horizon_field(t):
    return "inf" if t == math.inf else int(t)


def _emit(args, payload, csv_rows=None, csv_header=None):
    """Write JSON (default) or CSV; CSV falls back to key,value pairs."""
    if getattr(args, "format", "json") == "csv":
        lines = []
        if csv_rows is not None:
            if csv_header:
                lines.append("# " + csv_header)
            lines.extend(csv_rows)
        else:
            for key, value in payload.items():
                if isinstance(value, (list, dict)):
                    continue
                lines.append(f"{key},{value!r}" if isinstance(value, float) else f"{key},{value}")
        _write_out("\n".join(lines) + "\n", args.out)
    else:
        _write_out(json.dumps(payload, indent=2) + "\n", args.out)


def _marginal_csv(graph, marginals):
    return [f"{graph.label_of(i)},{float(marginals[i])!r}" for i in range(graph.node_count)]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_gen(args):
    spec = GenSpec(family=args.family, nodes=args.nodes, degree=args.degree,
                   edge_prob=args.edge_prob, b_dist=_parse_b_spec(args.b),
                   symmetric=not args.asymmetric, seed=args.seed)
    graph = generate(spec)
    _write_out(serialize_graph(graph), args.out)
    return 0


def _cmd_estimate(args):
    graph = _load_graph(args)
    p0 = _load_init(args, graph)
    report = dmp_est(graph, p0, args.horizon, trajectory=args.trajectory)
    payload = {
        "horizon": _horizon_field(report.t),
        "sigma": report.sigma,
        "marginals": _jsonable(report.marginals),
    }
    if args.trajectory:
        payload["trajectory"] = [
            {"t": t, "sigma": sigma, "marginals": _jsonable(marg)}
            for t, sigma, marg in report.trajectory
        ]
    _emit(args, payload, csv_rows=_marginal_csv(graph, report.marginals),
          csv_header="node,p_hat")
    return 0


def _cmd_estimate_inf(args):
    graph = _load_graph(args)
    p0 = _load_init(args, graph)
    cfg = FixedPointConfig(tolerance=args.tolerance, max_sweeps=args.max_sweeps)
    report = dmp_inf(graph, p0, cfg)
    payload = {
        "horizon": "inf",
        "sigma": report.sigma,
        "converged": report.converged,
        "sweeps": report.sweeps,
        "residual": report.residual,
        "marginals": _jsonable(report.marginals),
    }
    _emit(args, payload, csv_rows=_marginal_csv(graph, report.marginals),
          csv_header="node,p_hat")
    return 0


def _cmd_lt_estimate(args):
    graph = _load_graph(args)
    p0 = _load_init(args, graph)
    params = _load_lt_params(args, graph)
    report = lt_estimate(graph, params, p0, args.horizon, degree_cap=args.degree_cap)
    payload = {
        "horizon": _horizon_field(report.t),
        "sigma": report.sigma,
        "marginals": _jsonable(report.marginals),
    }
    _emit(args, payload, csv_rows=_marginal_csv(graph, report.marginals),
          csv_header="node,p_hat")
    return 0


def _cmd_mc(args):
    graph = _load_graph(args)
    p0 = _load_init(args, graph)
    horizon = _horizon_from(args)
    if args.model == "ic":
        report = ic_mc_marginals(graph, p0, horizon, args.runs, args.seed,
                                 threads=args.threads)
    else:
        params = _load_lt_params(args, graph)
        report = lt_mc_marginals(graph, params, p0, horizon, args.runs, args.seed,
                                 threads=args.threads)
    payload = {
        "runs": report.runs,
        "seed": report.rng_seed,
        "sigma_mc": report.sigma,
        "marginals": _jsonable(report.marginals),
        "std_errors": _jsonable(report.std_errors),
    }
    rows = [f"{graph.label_of(i)},{float(report.marginals[i])!r},{float(report.std_errors[i])!r}"
            for i in range(graph.node_count)]
    _emit(args, payload, csv_rows=rows, csv_header="node,p_mc,std_error")
    return 0


def _cmd_oracle(args):
    graph = _load_graph(args)
    p0 = _load_init(args, graph)
    horizon = _horizon_from(args)
    report = exact_marginals(graph, p0, horizon, liveness=args.liveness)
    payload = {
        "horizon": _horizon_field(report.t),
        "sigma": report.sigma,
        "marginals": _jsonable(report.marginals),
    }
    if args.messages:
        cavity = exact_cavity_messages(graph, p0, horizon, liveness=args.liveness)
        payload["messages"] = [
            {"src": graph.label_of(graph.src[a]), "dst": graph.label_of(graph.dst[a]),
             "p": float(cavity[a])}
            for a in range(graph.arc_count)
        ]
    _emit(args, payload, csv_rows=_marginal_csv(graph, report.marginals),
          csv_header="node,p_exact")
    return 0


def _cmd_compare(args):
    graph = _load_graph(args)
    p0 = _load_init(args, graph)
    horizon = _horizon_from(args)
    if args.model == "ic":
        if horizon is math.inf:
            dmp = dmp_inf(graph, p0, FixedPointConfig(tolerance=args.tolerance))
        else:
            dmp = dmp_est(graph, p0, horizon)
        mc = ic_mc_marginals(graph, p0, horizon, args.runs, args.seed,
                             threads=args.threads)
    else:
        params = _load_lt_params(args, graph)
        if horizon is math.inf:
            raise InputError("threshold-model compare needs a finite --horizon")
        dmp = lt_estimate(graph, params, p0, horizon)
        mc = lt_mc_marginals(graph, params, p0, horizon, args.runs, args.seed,
                             threads=args.threads)
    gaps = mc.marginals - dmp.marginals
    max_violation = float(gaps.max()) if gaps.size else 0.0
    payload = {
        "delta_p": delta_p(dmp.marginals, mc.marginals),
        "sigma_dmp": dmp.sigma,
        "sigma_mc": mc.sigma,
        "max_violation": max_violation,
    }
    _emit(args, payload)
    if args.model == "ic" and gaps.size:
        # the estimate upper-bounds the truth; flag breaks beyond sampling noise
        if np.any(gaps > 4.0 * mc.std_errors):
            sys.stderr.write("compare: cascade upper bound violated beyond 4 standard errors\n")
            return 2
    return 0


def _cmd_certify(args):
    graph = _load_graph(args)
    cert = exactness_certificate(graph, args.horizon)
    payload = {
        "girth": _jsonable(cert.girth) if cert.girth != math.inf else "inf",
        "horizon": cert.horizon,
        "exact": cert.exact,
    }
    _emit(args, payload)
    return 0


def _cmd_bracket(args):
    graph = _load_graph(args)
    p0 = _load_init(args, graph)
    horizon = _horizon_from(args)
    bracket = spanning_tree_lower_bound(graph, p0, horizon,
                                        strategy=args.tree_strategy,
                                        tree_seed=args.tree_seed)
    payload = {
        "horizon": _horizon_field(bracket.horizon),
        "strategy": bracket.strategy,
        "lower": bracket.lower,
        "upper": bracket.upper,
        "tree_edges": [[int(u), int(v)] for u, v in bracket.tree_edges],
    }
    _emit(args, payload)
    return 0


def run_bench(base_spec, sizes, horizon, repetitions, seed_fraction=0.01):
    """Time the finite-horizon estimator across a size ladder.

    Generation is excluded; each size gets one untimed warm-up run, then the
    median of `repetitions` timed runs on a monotonic clock.  Returns records
    sorted by size plus the least-squares log-log slope (needs >= 2 sizes).
    """
    if list(sizes) != sorted(set(sizes)):
        raise InputError("the size ladder must be strictly increasing")
    if repetitions < 1:
        raise InputError("repetitions must be at least 1")
    records = []
    for n in sizes:
        spec = GenSpec(family=base_spec.family, nodes=int(n), degree=base_spec.degree,
                       edge_prob=base_spec.edge_prob, b_dist=base_spec.b_dist,
                       symmetric=base_spec.symmetric, seed=base_spec.seed)
        graph = generate(spec)
        p0 = random_seed_set(graph, fraction=seed_fraction, seed=base_spec.seed)
        dmp_est(graph, p0, horizon)  # warm-up, untimed
        times = []
        sigma = math.nan
        for _ in range(repetitions):
            t0 = time.perf_counter()
            report = dmp_est(graph, p0, horizon)
            times.append(time.perf_counter() - t0)
            sigma = report.sigma
        wall = sorted(times)[len(times) // 2]
        records.append({"nodes": graph.node_count, "arcs": graph.arc_count,
                        "horizon": int(horizon), "wall_time_seconds": wall,
                        "sigma": sigma})
    slope = None
    if len(records) >= 2:
        xs = np.log([r["nodes"] for r in records])
        ys = np.log([r["wall_time_seconds"] for r in records])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return records, slope


def _cmd_bench(args):
    base = GenSpec(family=args.family, nodes=2, degree=args.degree,
                   edge_prob=args.edge_prob, b_dist=_parse_b_spec(args.b),
                   symmetric=not args.asymmetric, seed=args.seed)
    sizes = [int(s) for s in args.sizes.split(",") if s]
    records, slope = run_bench(base, sizes, args.horizon, args.repetitions,
                               seed_fraction=args.seed_fraction)
    payload = {
        "family": args.family,
        "horizon": args.horizon,
        "repetitions": args.repetitions,
        "records": records,
        "slope": slope,
    }
    rows = [f"{r['nodes']},{r['arcs']},{r['horizon']},{r['wall_time_seconds']!r},{r['sigma']!r}"
            for r in records]
    if slope is not None:
        rows.append(f"# slope,{slope!r}")
    _emit(args, payload, csv_rows=rows,
          csv_header="nodes,arcs,horizon,wall_time_seconds,sigma")
    return 0


def run_accuracy(graph, p0, horizon, runs, seed, threads=1, name="graph"):
    """Estimator-vs-sampling error and runtimes on one instance."""
    dmp_est(graph, p0, min(horizon, 1))  # warm the kernels, untimed
    t0 = time.perf_counter()
    dmp = dmp_est(graph, p0, horizon)
    dmp_runtime = time.perf_counter() - t0
    t0 = time.perf_counter()
    mc = ic_mc_marginals(graph, p0, horizon, runs, seed, threads=threads)
    mc_runtime = time.perf_counter() - t0
    return {
        "graph": name,
        "nodes": graph.node_count,
        "arcs": graph.arc_count,
        "horizon": int(horizon),
        "runs": runs,
        "delta_p": delta_p(dmp.marginals, mc.marginals),
        "sigma_dmp": dmp.sigma,
        "sigma_mc": mc.sigma,
        "dmp_runtime_seconds": dmp_runtime,
        "mc_runtime_seconds": mc_runtime,
    }


def _cmd_accuracy(args):
    if args.graph:
        graph = _load_graph(args)
        name = args.graph
    else:
        if not args.family or not args.nodes:
            raise InputError("accuracy needs --graph or --family with --nodes")
        spec = GenSpec(family=args.family, nodes=args.nodes, degree=args.degree,
                       edge_prob=args.edge_prob, b_dist=_parse_b_spec(args.b),
                       symmetric=not args.asymmetric, seed=args.seed)
        graph = generate(spec)
        name = f"{args.family}-{args.nodes}"
    if args.init:
        p0 = parse_initial_condition(_read(args.init), graph)
    else:
        p0 = random_seed_set(graph, fraction=args.seed_fraction, seed=args.seed)
    payload = run_accuracy(graph, p0, args.horizon, args.runs, args.seed,
                           threads=args.threads, name=name)
    _emit(args, payload)
    return 0


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------

def _add_common(sub, *, seed=False, threads=False):
    sub.add_argument("--out", default="-", help="output path, or - for stdout")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    if seed:
        sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    if threads:
        sub.add_argument("--threads", type=int, default=1)


def _add_graph_inputs(sub, init=True):
    sub.add_argument("--graph", required=True, help="edge-list file")
    sub.add_argument("--mode", choices=("directed", "undirected"), default=None,
                     help="override the file's %%mode header")
    if init:
        sub.add_argument("--init", default=None,
                         help="initial-condition file (default: all zeros)")


def _add_horizon_flags(sub):
    sub.add_argument("--horizon", type=int, default=None)
    sub.add_argument("--inf", action="store_true", help="infinite horizon")


def build_parser():
    parser = _Parser(prog="netspread",
                     description="Influence estimation via message passing, "
                                 "sampling, and exact enumeration.")
    parser.add_argument("--version", action="version", version=f"netspread {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a graph file")
    gen.add_argument("--family", required=True, choices=(
        "random_regular", "erdos_renyi", "random_tree", "cycle", "path", "star"))
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--degree", type=int, default=None)
    gen.add_argument("--edge-prob", type=float, default=None)
    gen.add_argument("--b", default="const:1.0", help="const:<c> or uniform:<lo>:<hi>")
    gen.add_argument("--asymmetric", action="store_true",
                     help="draw b independently per direction")
    _add_common(gen, seed=True)
    gen.set_defaults(func=_cmd_gen)

    est = subs.add_parser("estimate", help="finite-horizon estimate")
    _add_graph_inputs(est)
    est.add_argument("--horizon", type=int, required=True)
    est.add_argument("--trajectory", action="store_true",
                     help="include marginals for every horizon up to T")
    _add_common(est)
    est.set_defaults(func=_cmd_estimate)

    inf = subs.add_parser("estimate-inf", help="fixed-point estimate")
    _add_graph_inputs(inf)
    inf.add_argument("--tolerance", type=float, default=None)
    inf.add_argument("--max-sweeps", type=int, default=None)
    _add_common(inf)
    inf.set_defaults(func=_cmd_estimate_inf)

    lte = subs.add_parser("lt-estimate", help="threshold-model estimate")
    _add_graph_inputs(lte)
    lte.add_argument("--theta-file", default=None, help="lines 'node theta'; default 0.5")
    lte.add_argument("--eta-file", default=None, help="lines 'node eta'; default 1")
    lte.add_argument("--horizon", type=int, required=True)
    lte.add_argument("--degree-cap", type=int, default=DEFAULT_DEGREE_CAP)
    _add_common(lte)
    lte.set_defaults(func=_cmd_lt_estimate)

    mc = subs.add_parser("mc", help="Monte-Carlo marginals")
    _add_graph_inputs(mc)
    _add_horizon_flags(mc)
    mc.add_argument("--runs", type=int, required=True)
    mc.add_argument("--model", choices=("ic", "lt"), default="ic")
    mc.add_argument("--theta-file", default=None)
    mc.add_argument("--eta-file", default=None)
    _add_common(mc, seed=True, threads=True)
    mc.set_defaults(func=_cmd_mc)

    orc = subs.add_parser("oracle", help="exact marginals by enumeration")
    _add_graph_inputs(orc)
    _add_horizon_flags(orc)
    orc.add_argument("--messages", action="store_true",
                     help="also emit per-arc conditional probabilities")
    orc.add_argument("--liveness", choices=("auto", "arc", "edge", "forest"),
                     default="auto")
    _add_common(orc)
    orc.set_defaults(func=_cmd_oracle)

    cmp_ = subs.add_parser("compare", help="estimator vs Monte-Carlo")
    _add_graph_inputs(cmp_)
    _add_horizon_flags(cmp_)
    cmp_.add_argument("--runs", type=int, required=True)
    cmp_.add_argument("--model", choices=("ic", "lt"), default="ic")
    cmp_.add_argument("--theta-file", default=None)
    cmp_.add_argument("--eta-file", default=None)
    cmp_.add_argument("--tolerance", type=float, default=None,
                      help="fixed-point tolerance when --inf")
    _add_common(cmp_, seed=True, threads=True)
    cmp_.set_defaults(func=_cmd_compare)

    cert = subs.add_parser("certify", help="girth-based exactness certificate")
    _add_graph_inputs(cert, init=False)
    cert.add_argument("--horizon", type=int, required=True)
    _add_common(cert)
    cert.set_defaults(func=_cmd_certify)

    br = subs.add_parser("bracket", help="spanning-tree lower / full-graph upper")
    _add_graph_inputs(br)
    _add_horizon_flags(br)
    br.add_argument("--tree-strategy", choices=("bfs", "random"), default="bfs")
    br.add_argument("--tree-seed", type=int, default=DEFAULT_SEED)
    _add_common(br)
    br.set_defaults(func=_cmd_bracket)

    bench = subs.add_parser("bench", help="runtime-scaling ladder")
    bench.add_argument("--family", default="random_regular")
    bench.add_argument("--degree", type=int, default=3)
    bench.add_argument("--edge-prob", type=float, default=None)
    bench.add_argument("--b", default="uniform:0.0:0.1")
    bench.add_argument("--asymmetric", action="store_true")
    bench.add_argument("--sizes", default=",".join(str(s) for s in BENCH_SIZES))
    bench.add_argument("--horizon", type=int, default=10)
    bench.add_argument("--repetitions", type=int, default=3)
    bench.add_argument("--seed-fraction", type=float, default=0.01)
    _add_common(bench, seed=True)
    bench.set_defaults(func=_cmd_bench)

    acc = subs.add_parser("accuracy", help="error and runtime vs Monte-Carlo")
    acc.add_argument("--graph", default=None)
    acc.add_argument("--mode", choices=("directed", "undirected"), default=None)
    acc.add_argument("--init", default=None)
    acc.add_argument("--family", default=None)
    acc.add_argument("--nodes", type=int, default=None)
    acc.add_argument("--degree", type=int, default=None)
    acc.add_argument("--edge-prob", type=float, default=None)
    acc.add_argument("--b", default="uniform:0.0:0.1")
    acc.add_argument("--asymmetric", action="store_true")
    acc.add_argument("--seed-fraction", type=float, default=0.01)
    acc.add_argument("--horizon", type=int, default=10)
    acc.add_argument("--runs", type=int, default=10_000)
    _add_common(acc, seed=True, threads=True)
    acc.set_defaults(func=_cmd_accuracy)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"netspread: error: {exc}\n")
        return 1
    except InvariantViolation as exc:
        sys.stderr.write(f"netspread: invariant violation: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
