"""Named experiment designs, one per figure of the study.

Each preset returns ``{filename: str}`` for the CLI to write and hash.
"""
from __future__ import annotations

import csv
import io
import math
from typing import Callable

import numpy as np

from .experiments import (Cell, ExperimentConfig, ResultTable, SCALES, centrist_study, contour_grid,
                          contour_stubborn_priority, run_cells, scale_template, sf_network,
                          sweep_phi, sweep_priority_fraction, sweep_stubborn_fraction, transition_scan)
from .measures import pgm_text
from .model import ALIGNED, CONTROVERSIAL, PHI_CONSENSUS, PHI_POLARIZED

PRIORITY_GRID = [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
CONTOUR_STUBBORN_GRID = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
TRANSITION_GRID = [0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.04, 0.05]
CENTRIST_GRID = [0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
STUBBORN_GRID = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
EDGE_GRID = [0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5]
PHI_GRID = sorted(set(np.round(np.linspace(0.0, math.pi, 13), 3).tolist()) | {PHI_POLARIZED, PHI_CONSENSUS})


def _map_files(table: ResultTable, tag: str) -> dict:
    out = {}
    for c in table.cells:
        for r in c.reps:
            dm = r.get("density_map")
            if dm is None:
                continue
            label = "_".join(f"{k}{v}" for k, v in sorted(c.params.items()))
            stem = f"density_{tag}_{label}_rep{r['rep']}"
            out[stem + ".csv"] = dm.csv_text()
            out[stem + ".pgm"] = dm.pgm_text()
    return out


def _contour_files(table: ResultTable) -> dict:
    ps, ss, grid = contour_grid(table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["priority_fraction"] + [f"s={s:g}" for s in ss])
    for p, row in zip(ps, grid):
        w.writerow([f"{p:g}"] + ["" if math.isnan(v) else repr(float(v)) for v in row])
    # rows: stubborn fraction increasing upward; columns: priority fraction
    return {"contour_grid.csv": buf.getvalue(), "contour.pgm": pgm_text(grid.T[::-1])}


def _peaks_csv(results) -> str:
    buf = io.StringIO()
    cols = ["mode", "fraction", "low_peak", "low_mass", "high_peak", "high_mass", "q1", "median", "q3"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for res in results:
        for row in res.peaks():
            w.writerow({"mode": res.mode, **{k: ("" if isinstance(v, float) and math.isnan(v) else v)
                                             for k, v in row.items()}})
    return buf.getvalue()


def _template(scale, seed, overrides, **fixed) -> ExperimentConfig:
    return scale_template(scale, seed, **{**fixed, **overrides})


def fig1(scale, seed, workers, overrides, mode=None):
    t = _template(scale, seed, overrides)
    cells = [Cell({"phi": p}, t.replace(phi=p)) for p in (PHI_POLARIZED, PHI_CONSENSUS)]
    table = run_cells("fig1", cells, workers, map_reps=1)
    return {"results.csv": table.to_csv(), **_map_files(table, "fig1")}, {}


def fig2(scale, seed, workers, overrides, mode=None):
    t = _template(scale, seed, overrides)
    table = sweep_priority_fraction(PRIORITY_GRID, [ALIGNED, CONTROVERSIAL], t, workers)
    return {"results.csv": table.to_csv()}, {}


def _contour(posting):
    def preset(scale, seed, workers, overrides, mode=None):
        t = _template(scale, seed, overrides)
        if mode == "sf":
            t = t.replace(network=sf_network())
        table = contour_stubborn_priority(PRIORITY_GRID, CONTOUR_STUBBORN_GRID, t, ideologue=True,
                                          posting=posting, workers=workers)
        return {"results.csv": table.to_csv(), **_contour_files(table)}, {}
    return preset


def _transition(scale, seed, workers, overrides, mode=None):
    reps = SCALES[scale]["replications_transition"]
    t = _template(scale, seed, overrides, phi=PHI_CONSENSUS, replications=overrides.get("replications", reps))
    modes = ("stubborn", "ideologue") if mode in (None, "both") else (mode,)
    results = [transition_scan(TRANSITION_GRID, t, m, workers) for m in modes]
    files = {f"results_{r.mode}.csv": r.table.to_csv() for r in results}
    files["transition_peaks.csv"] = _peaks_csv(results)
    return files, {"critical_fraction": {r.mode: r.critical for r in results},
                   "logistic_midpoint": {r.mode: r.midpoint for r in results}}


def fig5(scale, seed, workers, overrides, mode=None):
    reps = SCALES[scale]["replications_transition"]
    t = _template(scale, seed, overrides, replications=overrides.get("replications", reps))
    table = centrist_study(CENTRIST_GRID, t, workers=workers)
    return {"results.csv": table.to_csv(), **_map_files(table, "fig5")}, {}


def s1(scale, seed, workers, overrides, mode=None):
    table = sweep_phi(PHI_GRID, _template(scale, seed, overrides), workers)
    return {"results.csv": table.to_csv()}, {"argmax_phi": table.extra["argmax_phi"]}


def s2(scale, seed, workers, overrides, mode=None):
    table = sweep_stubborn_fraction(STUBBORN_GRID, _template(scale, seed, overrides),
                                    postings=(ALIGNED, CONTROVERSIAL), workers=workers)
    return {"results.csv": table.to_csv()}, {}


def s4(scale, seed, workers, overrides, mode=None):
    t = _template(scale, seed, overrides)
    files = {}
    for profile in ("extremist", "centrist"):
        table = sweep_stubborn_fraction(EDGE_GRID, t, profile=profile, workers=workers,
                                        measure="periphery_edge_fraction")
        files[f"results_{profile}.csv"] = table.to_csv()
    return files, {}


PRESETS: dict[str, Callable] = {
    "fig1": fig1,
    "fig2": fig2,
    "fig3": _contour(ALIGNED),
    "fig4": _transition,
    "fig5": fig5,
    "s1": s1,
    "s2": s2,
    "s3": _contour(CONTROVERSIAL),
    "s4": s4,
    "s5": _transition,
}
