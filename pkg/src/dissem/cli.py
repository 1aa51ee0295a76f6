"""Command-line entry point: dissem <subcommand> [options]."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .analytics import BelowTransition, ConvergenceError, predict
from .degrees import POISSON, POWERLAW, ModelError, from_name
from .flooding import d_degree_in_giant, disseminate, measure
from .generators import GenerationError, GenSpec, generate
from .graph import Graph, GraphError, components
from .heuristics import HEURISTICS, UNIFORM, build_subgraph, make_choices
from .plot import METRICS, emit_plot
from .rng import derive_seed, stream

log = logging.getLogger("dissem")

PREDICTION_COLUMNS = (
    "model", "param", "alpha", "n", "q", "theta_G", "q_c", "q_nc1", "q_nc2", "theta_D",
    "r", "r_nc1", "r_nc2", "Z_GCC_D", "Z_D_GCC_G", "Z_GCC_G", "rho", "L_G", "L_D",
    "Pn", "Pm", "Pt", "pt_status", "gamma", "q_prime", "theta_G_prime", "failure_bound", "notes",
)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> list[str]:
    out = [x.strip() for x in text.split(",") if x.strip()]
    bad = [x for x in out if x not in HEURISTICS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown heuristic(s): {', '.join(bad)}")
    return out


def _model_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--model", choices=(POISSON, POWERLAW), required=required)
    p.add_argument("--z", type=float, help="mean degree (poisson)")
    p.add_argument("--tau", type=float, help="exponent (powerlaw)")
    p.add_argument("--max-degree", type=int, help="degree cap (default n-1)")


def _model(args, n: int):
    param = args.z if args.model == POISSON else args.tau
    if param is None:
        flag = "--z" if args.model == POISSON else "--tau"
        raise ModelError(f"{flag} is required with --model {args.model}")
    cap = args.max_degree if args.max_degree is not None else max(n - 1, 1)
    return from_name(args.model, param, cap)


def _out_path(args, name: str) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _write_csv(rows: list[dict], columns, dest) -> None:
    def fmt(v):
        if v is None:
            return ""
        return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)

    fh = sys.stdout if dest is None else open(dest, "w", newline="", encoding="ascii")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
    finally:
        if dest is not None:
            fh.close()


# -- subcommands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    m = _model(args, args.n)
    g = generate(GenSpec(args.n, m, args.seed))
    dest = Path(args.dump) if args.dump else _out_path(args, "graph.txt")
    g.dump(dest)
    labels = components(g)
    print(f"{m.label} n={g.n} m={g.edge_count} mean_degree={2 * g.edge_count / g.n:.4f} "
          f"giant={labels.giant_size} -> {dest}")
    return 0


def _load_or_generate(args) -> Graph:
    if args.load:
        return Graph.load(args.load)
    if not args.model:
        raise ValueError("either --load or --model is required")
    return generate(GenSpec(args.n, _model(args, args.n), args.seed))


def cmd_build(args) -> int:
    g = _load_or_generate(args)
    t = make_choices(g, args.heuristic, args.alpha, derive_seed(args.seed, 1))
    d = build_subgraph(g, t)
    labels = components(g)
    if args.dump_d:
        d.dump(args.dump_d)
    print(f"heuristic={args.heuristic} alpha={args.alpha} |E_G|={g.edge_count} |E_D|={d.edge_count} "
          f"zd={d_degree_in_giant(d, labels):.6f} giant_G={labels.giant_size} "
          f"giant_D={components(d).giant_size}")
    return 0


def cmd_simulate(args) -> int:
    g = _load_or_generate(args)
    labels = components(g)
    if labels.giant_size <= 1:
        raise ValueError("largest component of G has at most one node")
    if args.load_d:
        d = Graph.load(args.load_d)
        if d.n != g.n:
            raise GraphError("D and G differ in node count")
    else:
        d = build_subgraph(g, make_choices(g, args.heuristic, args.alpha, derive_seed(args.seed, 1)))
    zd = d_degree_in_giant(d, labels)
    origins = stream(args.seed, 2).choice(labels.giant_nodes(), size=args.runs)
    rng = stream(args.seed, 3)
    records, acc = [], {"pn": [], "pm": [], "pt": []}
    for run, o in enumerate(origins.tolist()):
        out = disseminate(d, o, args.gamma, rng)
        s = measure(g, d, out, labels, zd=zd)
        for k in acc:
            acc[k].append(getattr(s, k))
        records.append(harness.RunRecord(float("nan"), 0, args.alpha, args.heuristic, run, o,
                                         out.reached_count, out.messages, out.distance_sum,
                                         s.pn, s.pm, s.pt))
    if args.runs_csv:
        harness.emit_runs_csv(records, args.runs_csv)
    parts = [f"runs={args.runs}", f"gamma={args.gamma}"]
    for k, v in acc.items():
        mean, se = harness._mean_se(v)
        parts.append(f"{k}={mean:.6f}+-{se:.6f}")
    parts.append(f"zd={zd:.6f}")
    print(" ".join(parts))
    return 0


def _sweep_points(args):
    """(model kind, grid, alphas, gamma) families for --sweep."""
    alphas = args.alpha_list or list(harness.DEFAULT_ALPHAS)
    z_grid = [round(1.0 + 0.1 * k, 1) for k in range(1, 91)]
    tau_grid = [round(2.0 + 0.02 * k, 2) for k in range(51)]
    if args.figure == 1:
        return [(POISSON, z_grid, alphas, None)]
    if args.figure == 2:
        return [(POWERLAW, tau_grid, alphas, None)]
    if args.figure == 3:
        g = args.gamma if args.gamma < 1.0 else 0.95
        return [(POISSON, z_grid, [1.0], g), (POWERLAW, tau_grid, [1.0], g)]
    if not args.model:
        raise ValueError("--sweep needs --figure or --model")
    return [(args.model, z_grid if args.model == POISSON else tau_grid, alphas,
             args.gamma if args.gamma < 1.0 else None)]


def cmd_predict(args) -> int:
    rows = []
    if args.sweep:
        for kind, grid, alphas, gamma in _sweep_points(args):
            cap = args.max_degree if args.max_degree is not None else args.n - 1
            for param in grid:
                m = from_name(kind, param, cap)
                for a in alphas:
                    try:
                        rows.append(predict(m, a, args.n, gamma).as_row())
                    except BelowTransition as exc:
                        log.warning("%s", exc)
    else:
        gamma = args.gamma if args.gamma < 1.0 else None
        rows.append(predict(_model(args, args.n), args.alpha, args.n, gamma).as_row())
    _write_csv(rows, PREDICTION_COLUMNS, args.csv)
    return 0


def _experiment_plans(args):
    if args.figure:
        return harness.figure_plans(args.figure, graphs=args.graphs, runs=args.runs,
                                    n=args.n, seed=args.seed, model=args.model)
    if not args.model or not args.grid:
        raise ValueError("experiment needs --figure, or --model together with --grid")
    kw = {}
    if args.alpha_list:
        kw["alphas"] = args.alpha_list
    if args.heuristics:
        kw["heuristics"] = args.heuristics
    return [harness.ExperimentPlan(args.model, args.grid, graphs=args.graphs, runs=args.runs,
                                   n=args.n, gamma=args.gamma, seed=args.seed,
                                   max_degree=args.max_degree, **kw)]


def cmd_experiment(args) -> int:
    for plan in _experiment_plans(args):
        stem = f"fig{args.figure}_{plan.model}" if args.figure else f"experiment_{plan.model}"
        rows = harness.run_experiment(plan)
        if not rows:
            raise ValueError(f"no grid point of {plan.model} is above the phase transition")
        path = harness.emit_csv(rows, _out_path(args, stem + ".csv"))
        print(path)
        if not args.no_plot:
            for metric in METRICS:
                print(emit_plot(rows, metric, _out_path(args, f"{stem}_{metric}.svg")))
    return 0


def cmd_plot(args) -> int:
    rows = harness.read_csv(args.csv)
    if args.heuristic_filter:
        rows = [r for r in rows if r.heuristic == args.heuristic_filter]
    metrics = list(METRICS) if args.metric == "all" else [args.metric]
    stem = Path(args.csv).stem
    for metric in metrics:
        print(emit_plot(rows, metric, _out_path(args, f"{stem}_{metric}.svg")))
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dissem", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--n", type=int, default=10_000)

    p = sub.add_parser("generate", help="generate a random graph and write its edge list")
    common(p)
    _model_args(p)
    p.add_argument("--dump", help="edge-list output path (default OUT/graph.txt)")
    p.set_defaults(func=cmd_generate)

    def graph_source(p):
        p.add_argument("--load", help="edge-list file for G")
        _model_args(p, required=False)
        p.add_argument("--heuristic", choices=HEURISTICS, default=UNIFORM)
        p.add_argument("--alpha", type=float, default=0.5)

    p = sub.add_parser("build", help="build the dissemination subgraph D of a graph")
    common(p)
    graph_source(p)
    p.add_argument("--dump-d", help="write D as an edge list")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", help="flood repeatedly from random originators")
    common(p)
    graph_source(p)
    p.add_argument("--load-d", help="edge-list file for D (otherwise built from G)")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--runs-csv", help="write one CSV record per dissemination")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict", help="analytic predictions as CSV")
    common(p)
    _model_args(p, required=False)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--alphas", dest="alpha_list", type=_floats, help="alpha list for --sweep")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--sweep", action="store_true", help="emit the analytic curves over a fine grid")
    p.add_argument("--figure", type=int, choices=(1, 2, 3))
    p.add_argument("--csv", help="output file (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("experiment", help="replicated sweep with CSV and SVG output")
    common(p)
    p.add_argument("--figure", type=int, choices=(1, 2, 3))
    p.add_argument("--model", choices=(POISSON, POWERLAW))
    p.add_argument("--max-degree", type=int)
    p.add_argument("--grid", type=_floats, help="comma-separated z or tau values")
    p.add_argument("--alpha", dest="alpha_list", type=_floats, help="comma-separated alphas")
    p.add_argument("--heuristic", dest="heuristics", type=_names, help="comma-separated heuristics")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--graphs", type=int, default=30, help="graphs per grid point")
    p.add_argument("--runs", type=int, default=100, help="disseminations per subgraph")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="render SVG plots from an experiment CSV")
    p.add_argument("csv")
    p.add_argument("--metric", choices=(*METRICS, "all"), default="all")
    p.add_argument("--heuristic", dest="heuristic_filter", choices=HEURISTICS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError, BelowTransition, ConvergenceError,
            GenerationError) as exc:
        print(f"dissem {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
