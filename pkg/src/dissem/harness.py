"""Replicated experiments: graphs x subgraphs x disseminations, aggregated per point."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytics import BelowTransition, ConvergenceError, failure_fixed_point, predict
from .degrees import POISSON, POWERLAW, above_phase_transition, from_name
from .flooding import d_degree_in_giant, disseminate, measure, mean_distance
from .generators import GenSpec, generate
from .graph import bfs_distances, components
from .heuristics import DEGREE, UNIFORM, build_subgraph, make_choices
from .rng import derive_seed, stream

log = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.10, 0.25, 0.50, 0.75, 1.00)
CSV_COLUMNS = (
    "model", "param", "alpha", "heuristic", "gamma",
    "pn", "pn_se", "pm", "pm_se", "zd", "zd_se", "pt", "pt_se",
    "pn_analytic", "pm_analytic", "zd_analytic", "pt_analytic",
    "status",
)
RUN_COLUMNS = (
    "param", "graph", "alpha", "heuristic", "run", "originator",
    "reached", "messages", "distance_sum", "pn", "pm", "pt",
)

# sub-stream tags below (seed, point, graph)
_GRAPH, _ORIGINS, _CHOICES, _FAILURES = 0, 1, 2, 3


@dataclass
class ExperimentPlan:
    model: str
    grid: list[float]
    alphas: list[float] = field(default_factory=lambda: list(DEFAULT_ALPHAS))
    heuristics: list[str] = field(default_factory=lambda: [UNIFORM, DEGREE])
    graphs: int = 30
    runs: int = 100
    n: int = 10_000
    gamma: float = 1.0
    seed: int = 0
    max_degree: int | None = None

    def __post_init__(self):
        if self.graphs < 1 or self.runs < 1:
            raise ValueError("graphs and runs must both be at least 1")
        if self.model not in (POISSON, POWERLAW):
            raise ValueError(f"unknown model {self.model!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")

    @property
    def cap(self) -> int:
        return self.n - 1 if self.max_degree is None else self.max_degree


def figure_plans(figure: int, *, graphs: int = 30, runs: int = 100, n: int = 10_000,
                 seed: int = 0, model: str | None = None) -> list[ExperimentPlan]:
    """The sweeps behind each published figure, at the given replication."""
    z_grid = [float(z) for z in range(1, 11)]
    tau_grid = [round(2.0 + 0.1 * k, 1) for k in range(11)]
    common = dict(graphs=graphs, runs=runs, n=n, seed=seed)
    if figure == 1:
        plans = [ExperimentPlan(POISSON, z_grid, **common)]
    elif figure == 2:
        plans = [ExperimentPlan(POWERLAW, tau_grid, **common)]
    elif figure == 3:
        kw = dict(alphas=[0.50, 0.75, 1.00], heuristics=[DEGREE], gamma=0.95, **common)
        plans = [ExperimentPlan(POISSON, z_grid, **kw), ExperimentPlan(POWERLAW, tau_grid, **kw)]
    else:
        raise ValueError(f"no preset for figure {figure}")
    if model is not None:
        plans = [p for p in plans if p.model == model]
        if not plans:
            raise ValueError(f"figure {figure} has no {model} panel")
    return plans


@dataclass
class AggregateRow:
    model: str
    param: float
    alpha: float
    heuristic: str
    gamma: float
    pn: float
    pn_se: float
    pm: float
    pm_se: float
    zd: float
    zd_se: float
    pt: float
    pt_se: float
    pn_analytic: float | None = None
    pm_analytic: float | None = None
    zd_analytic: float | None = None
    pt_analytic: float | None = None
    status: str = "ok"

    def as_dict(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


@dataclass
class RunRecord:
    param: float
    graph: int
    alpha: float
    heuristic: str
    run: int
    originator: int
    reached: int
    messages: int
    distance_sum: int
    pn: float
    pm: float
    pt: float


def _mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return math.nan, math.nan
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def _analytic_columns(plan: ExperimentPlan, model, alpha: float, heuristic: str) -> tuple[dict, str]:
    cols: dict = {}
    status = "ok"
    if plan.gamma < 1.0:
        cols["pn_analytic"] = failure_fixed_point(model, plan.gamma).bound
    if heuristic != UNIFORM:
        return cols, status
    try:
        p = predict(model, alpha, plan.n)
    except (BelowTransition, ConvergenceError) as exc:
        return cols, f"analytic: {exc}"
    cols["zd_analytic"] = p.Z_D_GCC_G
    if plan.gamma == 1.0:
        cols["pn_analytic"] = p.Pn
        cols["pm_analytic"] = p.Pm
        cols["pt_analytic"] = p.Pt
    if p.pt_status != "ok":
        status = f"pt analytic {p.pt_status}"
    if p.notes:
        status = "; ".join([status, *p.notes])
    return cols, status


def _point(plan: ExperimentPlan, pi: int, param: float, records: list | None):
    """All replicates of one grid point; returns {(alpha, heuristic): samples}."""
    model = from_name(plan.model, param, plan.cap)
    combos = [(ai, a, hi, h) for ai, a in enumerate(plan.alphas) for hi, h in enumerate(plan.heuristics)]
    acc = {(a, h): {"pn": [], "pm": [], "pt": [], "zd": []} for _, a, _, h in combos}
    for gi in range(plan.graphs):
        g = generate(GenSpec(plan.n, model, derive_seed(plan.seed, pi, gi, _GRAPH)))
        labels = components(g)
        if labels.giant_size <= 1:
            log.warning("%s graph %d: largest component has %d node(s); skipped",
                        model.label, gi, labels.giant_size)
            continue
        giant = labels.giant_nodes()
        origins = stream(plan.seed, pi, gi, _ORIGINS).choice(giant, size=plan.runs)
        g_dist: dict[int, float] = {}
        for o in origins.tolist():
            if o not in g_dist:
                g_dist[o] = mean_distance(bfs_distances(g, o))
        for ai, alpha, hi, h in combos:
            table = make_choices(g, h, alpha, derive_seed(plan.seed, pi, gi, _CHOICES, ai, hi))
            d = build_subgraph(g, table, check=False)
            zd = d_degree_in_giant(d, labels)
            rng = stream(plan.seed, pi, gi, _FAILURES, ai, hi)
            bucket = acc[(alpha, h)]
            bucket["zd"].append(zd)
            for run, o in enumerate(origins.tolist()):
                out = disseminate(d, o, plan.gamma, rng)
                s = measure(g, d, out, labels, g_mean_distance=g_dist[o], zd=zd)
                bucket["pn"].append(s.pn)
                bucket["pm"].append(s.pm)
                bucket["pt"].append(s.pt)
                if records is not None:
                    records.append(RunRecord(param, gi, alpha, h, run, o, out.reached_count,
                                             out.messages, out.distance_sum, s.pn, s.pm, s.pt))
    return model, acc


def run_experiment(plan: ExperimentPlan, records: list | None = None) -> list[AggregateRow]:
    """Simulate every (grid point, alpha, heuristic) and attach predictions.

    Points below G's phase transition are skipped with a warning. Pass a list
    as ``records`` to collect one ``RunRecord`` per dissemination.
    """
    rows: list[AggregateRow] = []
    for pi, param in enumerate(plan.grid):
        model = from_name(plan.model, param, plan.cap)
        if not above_phase_transition(model):
            log.warning("%s is not above the phase transition; skipped", model.label)
            continue
        log.info("point %s", model.label)
        model, acc = _point(plan, pi, param, records)
        for alpha in plan.alphas:
            for h in plan.heuristics:
                b = acc[(alpha, h)]
                if not b["zd"]:
                    continue
                cols, status = _analytic_columns(plan, model, alpha, h)
                pn, pn_se = _mean_se(b["pn"])
                pm, pm_se = _mean_se(b["pm"])
                zd, zd_se = _mean_se(b["zd"])
                pt, pt_se = _mean_se(b["pt"])
                rows.append(AggregateRow(plan.model, float(param), float(alpha), h, float(plan.gamma),
                                         pn, pn_se, pm, pm_se, zd, zd_se, pt, pt_se,
                                         status=status, **cols))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def csv_text(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        d = row.as_dict() if hasattr(row, "as_dict") else vars(row)
        w.writerow([_fmt(d[c]) for c in columns])
    return buf.getvalue()


def emit_csv(rows, path) -> Path:
    """Header plus one line per row; floats via repr, missing values empty."""
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    path.write_text(csv_text(rows), encoding="ascii", newline="")
    return path


def emit_runs_csv(records, path) -> Path:
    path = Path(path)
    path.write_text(csv_text(records, RUN_COLUMNS), encoding="ascii", newline="")
    return path


def read_csv(path) -> list[AggregateRow]:
    numeric = set(CSV_COLUMNS) - {"model", "heuristic", "status"}
    rows = []
    with open(path, newline="", encoding="ascii") as fh:
        for rec in csv.DictReader(fh):
            kw = {}
            for c in CSV_COLUMNS:
                raw = rec.get(c, "")
                if c in numeric:
                    kw[c] = float(raw) if raw != "" else None
                else:
                    kw[c] = raw
            rows.append(AggregateRow(**kw))
    return rows
