"""Replicated runs, parameter sweeps and transition scans.

Every replication ``r`` of every cell draws from
``SeedSequence([master_seed, r])``: cells that differ only in parameters
share networks and initial opinions (common random numbers), and no result
depends on how the work was scheduled.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import log_expit

from . import netgen
from .graph import AdaptiveDigraph
from .measures import BIMODAL_THRESHOLD, measure_snapshot
from .model import (ALIGNED, CONTROVERSIAL, PHI_POLARIZED, ModelParams, OpinionState,
                    Simulation, init_state)

logger = logging.getLogger(__name__)

SUMMARY_MEASURES = ("bc_hom", "bc", "stubborn_edge_fraction", "periphery_edge_fraction")
REPLICATION_FIELDS = ("bc", "bc_hom", "bc_all", "bc_hom_all",
                      "stubborn_edge_fraction", "periphery_edge_fraction")


@dataclass
class ExperimentConfig:
    n: int = 2000
    network: dict = field(default_factory=lambda: {"model": "er", "p": 0.008})
    phi: float = PHI_POLARIZED
    delta: float = 0.1
    priority_fraction: float = 0.0
    stubborn_fraction: float = 0.0
    stubborn_profile: str = "extremist"
    stubborn_are_priority: bool = False
    stubborn_posting: str = ALIGNED
    priority_posting: str = CONTROVERSIAL
    replications: int = 20
    iterations: int = 20_000_000
    master_seed: int = 0
    initial_snapshot: Optional[dict] = None  # {"opinions": csv path, "edges": edge-list path}

    def __post_init__(self):
        for name in ("priority_fraction", "stubborn_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.stubborn_are_priority and self.stubborn_fraction > self.priority_fraction + 1e-12:
            raise ValueError("ideologue mode needs stubborn_fraction <= priority_fraction")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.stubborn_profile not in ("extremist", "centrist"):
            raise ValueError(f"unknown stubborn profile {self.stubborn_profile!r}")
        for name in ("stubborn_posting", "priority_posting"):
            if getattr(self, name) not in (ALIGNED, CONTROVERSIAL):
                raise ValueError(f"{name} must be 'aligned' or 'controversial'")
        ModelParams(phi=self.phi, delta=self.delta, iterations=self.iterations)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


def replication_rng(master_seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(rep)]))


def build_replication(config: ExperimentConfig, rep: int):
    """Network, initial state and generator for replication ``rep`` (nothing run yet)."""
    rng = replication_rng(config.master_seed, rep)
    base = None
    if config.initial_snapshot:
        base = OpinionState.read_csv(config.initial_snapshot["opinions"])
        graph = AdaptiveDigraph.read_edgelist(config.initial_snapshot["edges"], n=base.n)
    else:
        graph = netgen.generate(config.network, config.n, rng)
    state = init_state(graph.n, rng, priority_fraction=config.priority_fraction,
                       stubborn_fraction=config.stubborn_fraction,
                       stubborn_profile=config.stubborn_profile,
                       stubborn_are_priority=config.stubborn_are_priority,
                       priority_posting=config.priority_posting,
                       stubborn_posting=config.stubborn_posting,
                       opinions=None if base is None else base.opinions)
    params = ModelParams(phi=config.phi, delta=config.delta, iterations=config.iterations)
    return Simulation(state, graph, params, rng)


def run_replication(config: ExperimentConfig, rep: int, with_map: bool = False) -> dict:
    t0 = time.perf_counter()
    sim = build_replication(config, rep)
    sim.run()
    s = sim.state
    m = measure_snapshot(sim.graph, s.opinions, s.priority, s.stubborn, with_map=with_map)
    row = {"rep": rep, "seconds": round(time.perf_counter() - t0, 3)}
    row.update({k: m.get(k, math.nan) for k in REPLICATION_FIELDS})
    row["degenerate"] = any(math.isnan(row[k]) for k in ("bc", "bc_hom"))
    if with_map:
        row["density_map"] = m["density_map"]
    return row


def _task(args):
    config, rep, with_map = args
    return run_replication(config, rep, with_map)


def default_workers() -> int:
    env = os.environ.get("ECHOSIM_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_tasks(tasks: list, workers: Optional[int]) -> list:
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(tasks) == 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_task, tasks, chunksize=1))


def summarize(values: Sequence[float]) -> dict:
    """Mean, SD, quartiles and the split of the values around 5/9."""
    v = np.asarray([x for x in values if not math.isnan(x)], dtype=np.float64)
    if v.size == 0:
        return {k: math.nan for k in ("mean", "sd", "q1", "median", "q3", "mass_above", "mean_above",
                                      "mean_below")}
    above = v > BIMODAL_THRESHOLD
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {
        "mean": float(v.mean()),
        "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        "q1": float(q1), "median": float(med), "q3": float(q3),
        "mass_above": float(above.mean()),
        "mean_above": float(v[above].mean()) if above.any() else math.nan,
        "mean_below": float(v[~above].mean()) if (~above).any() else math.nan,
    }


@dataclass
class Cell:
    params: dict
    config: Optional[ExperimentConfig]
    reps: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.config is not None

    def values(self, measure: str = "bc_hom") -> list:
        return [r[measure] for r in self.reps]

    def stats(self, measure: str = "bc_hom") -> dict:
        if not self.valid:
            return {}
        return summarize(self.values(measure))


@dataclass
class ResultTable:
    name: str
    cells: list
    measure: str = "bc_hom"
    extra: dict = field(default_factory=dict)

    def cell(self, **params) -> Cell:
        for c in self.cells:
            if all(c.params.get(k) == v for k, v in params.items()):
                return c
        raise KeyError(params)

    def series(self, key: str, measure: Optional[str] = None, stat: str = "mean", **fixed):
        """``(x, y)`` arrays of one summary statistic along parameter ``key``."""
        measure = measure or self.measure
        xs, ys = [], []
        for c in self.cells:
            if c.valid and all(c.params.get(k) == v for k, v in fixed.items()):
                xs.append(c.params[key])
                ys.append(c.stats(measure)[stat])
        return np.array(xs, dtype=float), np.array(ys, dtype=float)

    def to_csv(self) -> str:
        """Replication rows then one summary row per cell (absent cells included, empty)."""
        pkeys = sorted({k for c in self.cells for k in c.params})
        cols = (["kind"] + pkeys + ["rep", "seed"] + list(REPLICATION_FIELDS) + ["degenerate"]
                + ["measure", "count", "mean", "sd", "q1", "median", "q3", "mass_above", "mean_above",
                   "mean_below"])
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
        w.writeheader()
        for c in self.cells:
            seed = c.config.master_seed if c.valid else ""
            for r in c.reps:
                row = {"kind": "replication", **c.params, "seed": seed}
                # wall time is left to the manifest so the table stays byte-stable
                row.update({k: _fmt(r[k]) for k in ("rep", *REPLICATION_FIELDS, "degenerate")})
                w.writerow(row)
        for c in self.cells:
            for measure in SUMMARY_MEASURES:
                row = {"kind": "summary" if c.valid else "absent", **c.params, "measure": measure,
                       "count": len(c.reps)}
                row.update({k: _fmt(v) for k, v in c.stats(measure).items()})
                w.writerow(row)
        return buf.getvalue()

    def wall_times(self) -> list:
        return [{"params": c.params, "rep": r["rep"], "seconds": r["seconds"]} for c in self.cells for r in c.reps]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v


def run_cells(name: str, cells: list, workers: Optional[int] = None, measure: str = "bc_hom",
              map_reps: int = 0) -> ResultTable:
    """Fan all replications of all valid cells out to the pool; reduce in (cell, rep) order."""
    tasks, owners = [], []
    for ci, c in enumerate(cells):
        if not c.valid:
            continue
        for rep in range(c.config.replications):
            tasks.append((c.config, rep, rep < map_reps))
            owners.append(ci)
    logger.info("%s: %d cells, %d runs", name, len(cells), len(tasks))
    results = _run_tasks(tasks, workers)
    for ci, row in zip(owners, results):
        cells[ci].reps.append(row)
    for c in cells:
        c.reps.sort(key=lambda r: r["rep"])
    return ResultTable(name, cells, measure)


def run_replications(config: ExperimentConfig, workers: Optional[int] = None) -> Cell:
    return run_cells("replications", [Cell({}, config)], workers).cells[0]


def sweep_phi(phis: Iterable[float], template: ExperimentConfig, workers=None) -> ResultTable:
    phis = list(phis)
    if not phis:
        raise ValueError("empty phi grid")
    table = run_cells("phi", [Cell({"phi": float(p)}, template.replace(phi=float(p))) for p in phis], workers)
    x, y = table.series("phi")
    table.extra["argmax_phi"] = float(x[int(np.nanargmax(y))])
    return table


def sweep_priority_fraction(fractions: Iterable[float], rules: Sequence[str], template: ExperimentConfig,
                            workers=None) -> ResultTable:
    cells = [Cell({"posting": rule, "priority_fraction": float(f)},
                  template.replace(priority_fraction=float(f), priority_posting=rule))
             for rule in rules for f in fractions]
    return run_cells("priority_fraction", cells, workers)


def contour_stubborn_priority(priority_grid, stubborn_grid, template: ExperimentConfig, *,
                              ideologue: bool = True, profile: str = "extremist",
                              posting: str = ALIGNED, workers=None) -> ResultTable:
    """Mean BC_hom over the priority x stubborn plane; ideologue cells with s > p are absent."""
    cells = []
    for p in priority_grid:
        for s in stubborn_grid:
            params = {"priority_fraction": float(p), "stubborn_fraction": float(s)}
            if (ideologue and s > p + 1e-12) or (not ideologue and s + p > 1.0):
                cells.append(Cell(params, None))
                continue
            cfg = template.replace(priority_fraction=float(p), stubborn_fraction=float(s),
                                   stubborn_are_priority=ideologue, stubborn_profile=profile,
                                   priority_posting=posting, stubborn_posting=posting)
            cells.append(Cell(params, cfg))
    return run_cells("contour", cells, workers)


def contour_grid(table: ResultTable, measure: str = "bc_hom") -> tuple:
    """``(priority values, stubborn values, grid[p, s])`` with NaN for absent cells."""
    ps = sorted({c.params["priority_fraction"] for c in table.cells})
    ss = sorted({c.params["stubborn_fraction"] for c in table.cells})
    grid = np.full((len(ps), len(ss)), np.nan)
    for c in table.cells:
        if c.valid:
            grid[ps.index(c.params["priority_fraction"]), ss.index(c.params["stubborn_fraction"])] = \
                c.stats(measure)["mean"]
    return np.array(ps), np.array(ss), grid


def sweep_stubborn_fraction(fractions, template: ExperimentConfig, *, modes=("stubborn", "ideologue"),
                            profile: str = "extremist", postings=(ALIGNED,), workers=None,
                            measure: str = "bc_hom", map_reps: int = 0) -> ResultTable:
    """Stubborn fraction sweep; in ideologue mode every stubborn user is also priority."""
    cells = []
    for posting in postings:
        for mode in modes:
            for f in fractions:
                f = float(f)
                ideo = mode == "ideologue"
                cfg = template.replace(stubborn_fraction=f, priority_fraction=f if ideo else 0.0,
                                       stubborn_are_priority=ideo, stubborn_profile=profile,
                                       stubborn_posting=posting, priority_posting=posting)
                cells.append(Cell({"posting": posting, "mode": mode, "stubborn_fraction": f}, cfg))
    return run_cells("stubborn_fraction", cells, workers, measure=measure, map_reps=map_reps)


def critical_fraction(fractions: Sequence[float], masses: Sequence[float]) -> Optional[float]:
    """First upward crossing of mass 0.5, linearly interpolated; None if the scan never crosses."""
    xs = np.asarray(fractions, dtype=float)
    ms = np.asarray(masses, dtype=float)
    order = np.argsort(xs)
    xs, ms = xs[order], ms[order]
    for k in range(xs.size):
        if ms[k] == 0.5:
            return float(xs[k])
        if k and ms[k - 1] < 0.5 < ms[k]:
            t = (0.5 - ms[k - 1]) / (ms[k] - ms[k - 1])
            return float(xs[k - 1] + t * (xs[k] - xs[k - 1]))
    return None


def logistic_midpoint(fractions: Sequence[float], outcomes: Sequence[bool]) -> Optional[float]:
    """Fraction where a logistic fit of per-run outcomes crosses 1/2.

    Uses every run of the scan, not only the two grid points around the
    crossing. None when the fit is not increasing or the midpoint falls
    outside the scanned range.
    """
    x = np.asarray(fractions, dtype=float)
    y = np.asarray(outcomes, dtype=float)
    if x.size < 2 or y.min() == y.max() or x.std() == 0:
        return None
    mu, sd = x.mean(), x.std()
    z = (x - mu) / sd

    def nll(w):
        eta = w[0] + w[1] * z
        return -(y * log_expit(eta) + (1 - y) * log_expit(-eta)).sum()

    w = minimize(nll, np.array([0.0, 1.0]), method="BFGS").x
    if w[1] <= 0:
        return None
    mid = mu - w[0] / w[1] * sd
    return float(mid) if x.min() <= mid <= x.max() else None


@dataclass
class TransitionResult:
    mode: str
    table: ResultTable
    critical: Optional[float]
    midpoint: Optional[float] = None

    def peaks(self) -> list:
        """Per fraction: both sides of the 5/9 split (mean and mass) plus the quartile band."""
        out = []
        for c in self.table.cells:
            st = c.stats()
            out.append({"fraction": c.params["stubborn_fraction"],
                        "low_peak": st["mean_below"], "low_mass": 1.0 - st["mass_above"],
                        "high_peak": st["mean_above"], "high_mass": st["mass_above"],
                        "q1": st["q1"], "median": st["median"], "q3": st["q3"]})
        return out


def transition_scan(fractions, template: ExperimentConfig, mode: str = "stubborn", workers=None) -> TransitionResult:
    """Extremist stubborn (or ideologue) users added to a consensus-poised system."""
    if mode not in ("stubborn", "ideologue"):
        raise ValueError("mode must be 'stubborn' or 'ideologue'")
    table = sweep_stubborn_fraction(fractions, template, modes=(mode,), profile="extremist", workers=workers)
    x, mass = table.series("stubborn_fraction", stat="mass_above")
    crit = critical_fraction(x, mass)
    runs = [(c.params["stubborn_fraction"], v > BIMODAL_THRESHOLD) for c in table.cells for v in c.values()
            if not math.isnan(v)]
    mid = logistic_midpoint([f for f, _ in runs], [o for _, o in runs]) if runs else None
    table.extra.update(critical_fraction=crit, logistic_midpoint=mid)
    return TransitionResult(mode, table, crit, mid)


def centrist_study(fractions, template: ExperimentConfig, modes=("stubborn", "ideologue"),
                   workers=None, map_reps: int = 1) -> ResultTable:
    """Centrist stubborn sweep judged on BC of normal users; density maps kept for the first replications."""
    return sweep_stubborn_fraction(fractions, template, modes=modes, profile="centrist", workers=workers,
                                   measure="bc", map_reps=map_reps)


SCALES = {
    "desk": {"n": 2000, "network": {"model": "er", "p": 0.008}, "iterations": 20_000_000,
             "replications": 20, "replications_transition": 20},
    "paper": {"n": 10_000, "network": {"model": "er", "p": 1.6e-3}, "iterations": 100_000_000,
              "replications": 100, "replications_transition": 500},
}


def scale_template(scale: str, master_seed: int, **overrides) -> ExperimentConfig:
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}; choose from {sorted(SCALES)}")
    s = SCALES[scale]
    cfg = ExperimentConfig(n=s["n"], network=dict(s["network"]), iterations=s["iterations"],
                           replications=s["replications"], master_seed=master_seed)
    return cfg.replace(**overrides)


def sf_network() -> dict:
    return {"model": "sf", "lambda": 2.43, "kmin": 3}
