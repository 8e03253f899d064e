"""Bimodality coefficients, neighbor means, density maps and core-periphery fractions."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .graph import AdaptiveDigraph

BIMODAL_THRESHOLD = 5.0 / 9.0


def neighbor_mean(graph: AdaptiveDigraph, opinions) -> tuple[np.ndarray, np.ndarray]:
    """Mean opinion over each node's followees.

    Returns ``(b_nn, has_out)``; ``b_nn`` is NaN where the node follows nobody.
    """
    opinions = np.asarray(opinions, dtype=np.float64)
    deg = graph.out_degree()
    sums = np.bincount(graph.src, weights=opinions[graph.dst], minlength=graph.n)
    has_out = deg > 0
    b_nn = np.full(graph.n, np.nan)
    b_nn[has_out] = sums[has_out] / deg[has_out]
    return b_nn, has_out


def bimodality_coefficient(values) -> float:
    """Sarle's coefficient with bias-corrected skewness and excess kurtosis.

    NaN for a zero-variance sample.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n < 4:
        raise ValueError("bimodality coefficient needs at least 4 values")
    if np.ptp(x) == 0 or np.var(x) == 0:
        return math.nan
    g = stats.skew(x, bias=False)
    k = stats.kurtosis(x, fisher=True, bias=False)
    return float((g * g + 1.0) / (k + 3.0 * (n - 1) ** 2 / ((n - 2) * (n - 3))))


def diagonal_projection(b, b_nn) -> np.ndarray:
    """First coordinate of the (b, b_nn) cloud after a 45 degree rotation."""
    b = np.asarray(b, dtype=np.float64)
    b_nn = np.asarray(b_nn, dtype=np.float64)
    if b.shape != b_nn.shape:
        raise ValueError("b and b_nn must be aligned")
    return (b + b_nn) / math.sqrt(2.0)


def bc_hom(b, b_nn) -> float:
    return bimodality_coefficient(diagonal_projection(b, b_nn))


def is_bimodal(coefficient: float) -> bool:
    return coefficient > BIMODAL_THRESHOLD


@dataclass
class DensityMap:
    grid: np.ndarray  # grid[x_bin, y_bin]; x is b, y is b_nn
    bins: int

    @property
    def centers(self) -> np.ndarray:
        edges = np.linspace(-1.0, 1.0, self.bins + 1)
        return (edges[:-1] + edges[1:]) / 2

    @property
    def total(self) -> int:
        return int(self.grid.sum())

    def quadrant_mass(self) -> dict:
        """Counts per quadrant; bins straddling an axis (odd ``bins``) are left out."""
        c = self.centers
        pos, neg = c > 0, c < 0
        g = self.grid
        return {"q1": int(g[np.ix_(pos, pos)].sum()), "q2": int(g[np.ix_(neg, pos)].sum()),
                "q3": int(g[np.ix_(neg, neg)].sum()), "q4": int(g[np.ix_(pos, neg)].sum())}

    def csv_text(self) -> str:
        c = self.centers
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["b", "b_nn", "count"])
        for ix in range(self.bins):
            for iy in range(self.bins):
                w.writerow([f"{c[ix]:.6g}", f"{c[iy]:.6g}", int(self.grid[ix, iy])])
        return buf.getvalue()

    def pgm_text(self) -> str:
        # b runs left to right, b_nn bottom to top
        return pgm_text(self.grid.T[::-1])

    def write_csv(self, path) -> None:
        Path(path).write_text(self.csv_text())

    def write_pgm(self, path) -> None:
        Path(path).write_text(self.pgm_text(), encoding="ascii")


def pgm_text(image, maxval: int = 255) -> str:
    """ASCII P2 raster of ``image[row, col]`` (row 0 at the top); NaN is painted black."""
    img = np.asarray(image, dtype=np.float64)
    finite = np.isfinite(img)
    lo = img[finite].min() if finite.any() else 0.0
    hi = img[finite].max() if finite.any() else 0.0
    scaled = np.zeros(img.shape, dtype=np.int64)
    if hi > lo:
        scaled[finite] = np.round((img[finite] - lo) / (hi - lo) * maxval).astype(np.int64)
    rows = [" ".join(map(str, r)) for r in scaled.tolist()]
    h, w = img.shape
    return f"P2\n{w} {h}\n{maxval}\n" + "\n".join(rows) + "\n"


def density_map(b, b_nn, bins: int = 50) -> DensityMap:
    if bins < 2:
        raise ValueError("density map needs at least 2 bins")
    b = np.asarray(b, dtype=np.float64)
    b_nn = np.asarray(b_nn, dtype=np.float64)
    if b.shape != b_nn.shape:
        raise ValueError("b and b_nn must be aligned")
    # histogram2d closes the last bin, so +1 lands inside the grid
    grid, _, _ = np.histogram2d(b, b_nn, bins=bins, range=[[-1.0, 1.0], [-1.0, 1.0]])
    return DensityMap(grid.astype(np.int64), bins)


def stubborn_edge_fraction(graph: AdaptiveDigraph, stubborn) -> tuple[float, float]:
    """``(touching a stubborn user, between two non-stubborn users)`` as edge fractions."""
    if graph.edge_count == 0:
        raise ValueError("graph has no edges")
    stubborn = np.asarray(stubborn, dtype=bool)
    touch = stubborn[graph.src] | stubborn[graph.dst]
    f = float(touch.mean())
    return f, 1.0 - f


def measure_snapshot(graph: AdaptiveDigraph, opinions, priority, stubborn, bins: int = 50,
                     with_map: bool = False) -> dict:
    """Every coefficient for one snapshot, on all users and on normal users only."""
    opinions = np.asarray(opinions, dtype=np.float64)
    normal = ~(np.asarray(priority, dtype=bool) | np.asarray(stubborn, dtype=bool))
    b_nn, has_out = neighbor_mean(graph, opinions)
    sel = normal & has_out
    out = {
        "n_normal": int(normal.sum()),
        "bc_all": _safe(bimodality_coefficient, opinions),
        "bc_hom_all": _safe(bc_hom, opinions[has_out], b_nn[has_out]),
        "bc": _safe(bimodality_coefficient, opinions[normal]),
        "bc_hom": _safe(bc_hom, opinions[sel], b_nn[sel]),
    }
    if graph.edge_count:
        out["stubborn_edge_fraction"], out["periphery_edge_fraction"] = stubborn_edge_fraction(graph, stubborn)
    if with_map:
        out["density_map"] = density_map(opinions[sel], b_nn[sel], bins)
    return out


def _safe(fn, *args) -> float:
    try:
        return fn(*args)
    except ValueError:
        return math.nan


def write_coefficients(path, rows) -> None:
    """``measure,value,n`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["measure", "value", "n"])
        for name, value, n in rows:
            w.writerow([name, repr(float(value)), int(n)])
