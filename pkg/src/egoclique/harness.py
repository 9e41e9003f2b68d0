"""Seeded Monte-Carlo engine for size/power studies of the two detectors.

Each replicate draws one background graph, runs the detectors on it (the
``m = 0`` null run) and on one clique-planted copy per requested clique size.
Every random stream is keyed by ``(base_seed, stream, model, n, replicate, m)``
through :class:`numpy.random.SeedSequence`, so replicates can run in any order
on any number of workers and give identical results.
"""
from __future__ import annotations

import logging
import math
import multiprocessing
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _jit
from .chi2 import chi2_critical, max_quadrant_chi2, residual_points
from .detect import egonet_scan
from .fit import fit_model
from .models import KINDS, choose_clique, embed_clique, generate, make_simulation_spec

log = logging.getLogger(__name__)

DETECTORS = ("egonet", "chi2")
DEFAULT_K = {"er": None, "chunglu": None, "sbm": 2, "dcsbm": 3, "pabm": 2}
_MODEL_CODE = {k: i for i, k in enumerate(KINDS)}

STREAM_SPEC, STREAM_EDGES, STREAM_CLIQUE, STREAM_FIT = 0, 1, 2, 3

PAPER_ALPHAS = (0.01, 0.02, 0.05)
PAPER_SIZES = {500: (5, 10), 1000: (10, 20), 2000: (10, 20)}
PAPER_REPLICATES = {
    "er": {500: 10000, 1000: 10000, 2000: 10000},
    "chunglu": {500: 10000, 1000: 10000, 2000: 10000},
    "sbm": {500: 10000, 1000: 10000, 2000: 5000},
    "dcsbm": {500: 10000, 1000: 10000, 2000: 5000},
    "pabm": {500: 10000, 1000: 5000, 2000: 500},
}


def stream_seed(base_seed: int, stream: int, model: str, n: int, replicate: int = 0, m: int = 0):
    return np.random.SeedSequence(
        int(base_seed), spawn_key=(stream, _MODEL_CODE[model], int(n), int(replicate), int(m))
    )


@dataclass(frozen=True)
class SimConfig:
    model: str
    n: int
    clique_sizes: tuple = (10,)
    alphas: tuple = (0.01,)
    replicates: int = 100
    base_seed: int = 0
    detectors: tuple = ("egonet",)
    k: int | None = None
    include_null: bool = True

    def __post_init__(self):
        if self.model not in KINDS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(not 0 < a < 1 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1)")
        if any(not 2 <= m < self.n for m in self.clique_sizes):
            raise ValueError("clique sizes must lie in [2, n)")
        bad = set(self.detectors) - set(DETECTORS)
        if bad:
            raise ValueError(f"unknown detectors {sorted(bad)}")
        object.__setattr__(self, "clique_sizes", tuple(int(m) for m in self.clique_sizes))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if self.k is None:
            object.__setattr__(self, "k", DEFAULT_K[self.model])

    @property
    def sizes(self) -> tuple:
        return ((0,) if self.include_null else ()) + self.clique_sizes

    def spec(self):
        return make_simulation_spec(self.model, self.n, stream_seed(self.base_seed, STREAM_SPEC, self.model, self.n))


@dataclass(frozen=True)
class Outcome:
    """One detector decision on one graph at one significance level."""

    model: str
    n: int
    m: int
    alpha: float
    detector: str
    replicate: int
    failed: bool = False
    reject: bool = False
    n_flagged: int = 0
    n_true_flagged: int = 0
    t_n: float = math.nan
    clique_max_p: float = math.nan  # largest p-value among planted nodes
    error: str = ""


def _graph_outcomes(cfg: SimConfig, g, members, m, replicate):
    fit_seed = stream_seed(cfg.base_seed, STREAM_FIT, cfg.model, cfg.n, replicate, m)
    out = []
    common = dict(model=cfg.model, n=cfg.n, m=m, replicate=replicate)
    try:
        fm = fit_model(g, cfg.model, cfg.k, seed=fit_seed)
    except (ValueError, ArithmeticError) as exc:
        log.warning("fit failed for %s n=%d m=%d rep=%d: %s", cfg.model, cfg.n, m, replicate, exc)
        return [Outcome(alpha=a, detector=d, failed=True, error=str(exc), **common)
                for d in cfg.detectors for a in cfg.alphas]
    if "egonet" in cfg.detectors:
        scan = egonet_scan(g, fm)
        pv = scan.p_value
        t_n = float(pv.min())
        cmax = float(pv[members].max()) if members.size else math.nan
        for a in cfg.alphas:
            hit = pv < a / cfg.n
            out.append(Outcome(
                alpha=a, detector="egonet", reject=bool(t_n < a / cfg.n),
                n_flagged=int(hit.sum()), n_true_flagged=int(hit[members].sum()),
                t_n=t_n, clique_max_p=cmax, **common,
            ))
    if "chi2" in cfg.detectors:
        try:
            x1, x2 = residual_points(g, fm, seed=fit_seed)
        except (ValueError, ArithmeticError) as exc:
            out.extend(Outcome(alpha=a, detector="chi2", failed=True, error=str(exc), **common)
                       for a in cfg.alphas)
        else:
            stat = max_quadrant_chi2(x1, x2)
            for a in cfg.alphas:
                out.append(Outcome(alpha=a, detector="chi2", reject=bool(stat > chi2_critical(a)),
                                   t_n=stat, **common))
    return out


def run_replicate(cfg: SimConfig, spec, replicate: int) -> list[Outcome]:
    """All outcomes of one replicate: the null graph plus one planted copy per clique size."""
    g0 = generate(spec, stream_seed(cfg.base_seed, STREAM_EDGES, cfg.model, cfg.n, replicate))
    out = []
    for m in cfg.sizes:
        if m == 0:
            g, members = g0, np.zeros(0, dtype=np.int64)
        else:
            plan = choose_clique(cfg.n, m, stream_seed(cfg.base_seed, STREAM_CLIQUE, cfg.model, cfg.n, replicate, m))
            g, members = embed_clique(g0, plan), np.asarray(plan.members)
        out.extend(_graph_outcomes(cfg, g, members, m, replicate))
    return out


# --- aggregation ----------------------------------------------------------


def _rate(k, total):
    if total == 0:
        return None, None
    r = k / total
    return r, math.sqrt(r * (1.0 - r) / total)


@dataclass
class CellSummary:
    model: str
    n: int
    m: int
    alpha: float
    detector: str
    replicates: int = 0
    failures: int = 0
    rejections: int = 0
    false_alarm_rate: float | None = None
    false_alarm_se: float | None = None
    detection_rate: float | None = None
    detection_se: float | None = None
    node_false_alarm_rate: float | None = None
    node_false_alarm_se: float | None = None
    node_detection_rate: float | None = None
    node_detection_se: float | None = None
    all_members_flagged_rate: float | None = None

    @property
    def key(self):
        return (self.model, self.n, self.m, self.alpha, self.detector)

    @property
    def missing(self) -> bool:
        return self.replicates == 0


@dataclass
class SimSummary:
    cells: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def cell(self, model, n, m, alpha, detector="egonet") -> CellSummary:
        for c in self.cells:
            if c.key == (model, n, m, float(alpha), detector):
                return c
        raise KeyError((model, n, m, alpha, detector))

    def to_dict(self) -> dict:
        return {"config": self.config, "cells": [asdict(c) for c in self.cells]}

    @classmethod
    def from_dict(cls, d) -> "SimSummary":
        return cls([CellSummary(**c) for c in d["cells"]], dict(d.get("config", {})))

    def __eq__(self, other):
        if not isinstance(other, SimSummary):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def format_tables(self) -> str:
        return format_tables(self)


def aggregate(outcomes, config: dict | None = None) -> SimSummary:
    """Pool outcomes into per-cell rates with binomial standard errors."""
    groups = defaultdict(list)
    for o in outcomes:
        groups[(o.model, o.n, o.m, o.alpha, o.detector)].append(o)
    cells = []
    for key in sorted(groups):
        model, n, m, alpha, det = key
        rows = groups[key]
        ok = [o for o in rows if not o.failed]
        c = CellSummary(model, n, m, alpha, det, replicates=len(ok), failures=len(rows) - len(ok))
        c.rejections = sum(o.reject for o in ok)
        if ok:
            if m == 0:
                c.false_alarm_rate, c.false_alarm_se = _rate(c.rejections, len(ok))
            else:
                c.detection_rate, c.detection_se = _rate(c.rejections, len(ok))
            if det == "egonet":
                false_flags = sum(o.n_flagged - o.n_true_flagged for o in ok)
                c.node_false_alarm_rate, c.node_false_alarm_se = _rate(false_flags, len(ok) * (n - m))
                if m > 0:
                    tp = sum(o.n_true_flagged for o in ok)
                    c.node_detection_rate, c.node_detection_se = _rate(tp, len(ok) * m)
                    c.all_members_flagged_rate = sum(o.clique_max_p < alpha / n for o in ok) / len(ok)
        cells.append(c)
    return SimSummary(cells, dict(config or {}))


# --- execution ------------------------------------------------------------


def _init_worker():
    _jit.set_threads(1)


def _run_task(args):
    cfg, spec, reps = args
    out = []
    for r in reps:
        out.extend(run_replicate(cfg, spec, r))
    return out


def run_outcomes(configs, workers: int = 1, chunk: int = 10) -> list[Outcome]:
    configs = list(configs)
    tasks = []
    for cfg in configs:
        spec = cfg.spec()
        spec.rates  # build before pickling
        reps = list(range(cfg.replicates))
        for lo in range(0, len(reps), chunk):
            tasks.append((cfg, spec, reps[lo:lo + chunk]))
    if workers <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        # spawn, not fork: a parent that already ran a GNU OpenMP kernel cannot fork safely
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_init_worker) as ex:
            results = list(ex.map(_run_task, tasks))
    return [o for chunk_out in results for o in chunk_out]


def simulate(configs, workers: int = 1) -> SimSummary:
    configs = list(configs)
    outcomes = run_outcomes(configs, workers)
    # lists rather than tuples so the echo survives a JSON round trip unchanged
    cells = [{k: list(v) if isinstance(v, tuple) else v for k, v in asdict(c).items()} for c in configs]
    echo = {"cells": cells, "backend": _jit.backend()}
    return aggregate(outcomes, echo)


def paper_configs(scale: float = 0.05, base_seed: int = 0, models=KINDS, ns=(500, 1000, 2000),
                  detectors=DETECTORS) -> list[SimConfig]:
    """The full simulation-study factorial with replicate counts multiplied by ``scale``."""
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    out = []
    for model in models:
        for n in ns:
            reps = max(1, round(scale * PAPER_REPLICATES[model][n]))
            out.append(SimConfig(model, n, PAPER_SIZES[n], PAPER_ALPHAS, reps, base_seed, tuple(detectors)))
    return out


def paper_suite(scale: float = 0.05, base_seed: int = 0, workers: int = 1, **kw) -> SimSummary:
    summary = simulate(paper_configs(scale, base_seed, **kw), workers)
    summary.config.update({"suite": "paper", "scale": scale, "base_seed": base_seed})
    return summary


def _pct(x):
    return "   -   " if x is None else f"{100 * x:6.2f}%"


def format_tables(summary: SimSummary) -> str:
    """Plain-text size/power tables, one block per model and detector."""
    by = defaultdict(dict)
    for c in summary.cells:
        by[(c.model, c.detector)][(c.n, c.m, c.alpha)] = c
    lines = []
    for (model, det), cells in sorted(by.items()):
        lines.append(f"== {model} / {det}: network level ==")
        lines.append("     n  false alarm   alpha | m  detection | m  detection")
        ns = sorted({k[0] for k in cells})
        for n in ns:
            sizes = sorted({k[1] for k in cells if k[0] == n and k[1] > 0})
            for a in sorted({k[2] for k in cells if k[0] == n}):
                null = cells.get((n, 0, a))
                row = f"{n:6d}  {_pct(null.false_alarm_rate if null else None)}  {100 * a:5.1f}%"
                for m in sizes:
                    c = cells.get((n, m, a))
                    row += f" | {m:2d}  {_pct(c.detection_rate if c else None)}"
                lines.append(row)
        if det == "egonet":
            lines.append(f"== {model} / {det}: node level ==")
            lines.append("     n   alpha | m  node DR   node FA")
            for n in ns:
                for a in sorted({k[2] for k in cells if k[0] == n}):
                    row = f"{n:6d}  {100 * a:5.1f}%"
                    for m in sorted({k[1] for k in cells if k[0] == n and k[1] > 0}):
                        c = cells.get((n, m, a))
                        if c is None:
                            continue
                        row += (f" | {m:2d}  {_pct(c.node_detection_rate)}"
                                f"  {c.node_false_alarm_rate if c.node_false_alarm_rate is not None else float('nan'):.2e}")
                    lines.append(row)
        lines.append("")
    return "\n".join(lines)
