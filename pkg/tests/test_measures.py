import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from echosim.graph import AdaptiveDigraph
from echosim.measures import (BIMODAL_THRESHOLD, bc_hom, bimodality_coefficient, density_map,
                              diagonal_projection, measure_snapshot, neighbor_mean, stubborn_edge_fraction)


def bc_from_moments(x):
    """Oracle: BC from raw central moments with the textbook small-sample corrections."""
    x = np.asarray(x, dtype=float)
    n = x.size
    d = x - x.mean()
    m2, m3, m4 = (d ** 2).mean(), (d ** 3).mean(), (d ** 4).mean()
    g1 = m3 / m2 ** 1.5
    G1 = g1 * math.sqrt(n * (n - 1)) / (n - 2)
    g2 = m4 / m2 ** 2 - 3
    G2 = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6)
    return (G1 ** 2 + 1) / (G2 + 3 * (n - 1) ** 2 / ((n - 2) * (n - 3)))


def test_bc_matches_moment_oracle():
    rng = np.random.default_rng(0)
    for x in (rng.uniform(-1, 1, 37), rng.exponential(size=500), rng.normal(size=12)):
        assert bimodality_coefficient(x) == pytest.approx(bc_from_moments(x), rel=1e-10)


def test_bc_reference_laws():
    rng = np.random.default_rng(1)
    # uniform: skew 0, excess kurtosis -6/5 -> 1/(9/5) = 5/9
    assert bimodality_coefficient(rng.uniform(-1, 1, 100_000)) == pytest.approx(5 / 9, abs=0.01)
    # normal: 1/3
    assert bimodality_coefficient(rng.normal(size=100_000)) == pytest.approx(1 / 3, abs=0.01)
    # symmetric two-point: excess kurtosis -2 -> 1
    two = np.repeat([-1.0, 1.0], 5_000)
    assert bimodality_coefficient(two) == pytest.approx(1.0, abs=0.01)


def test_bc_degenerate_and_small():
    assert math.isnan(bimodality_coefficient(np.zeros(10)))
    with pytest.raises(ValueError):
        bimodality_coefficient([0.1, 0.2, 0.3])


samples = arrays(np.float64, st.integers(6, 60), elements=st.floats(-1, 1, allow_nan=False, width=32))


@settings(max_examples=200)
@given(samples, st.floats(0.1, 10.0), st.floats(-5, 5), st.booleans())
def test_bc_affine_invariance(x, a, c, flip):
    assume(np.std(x) > 1e-3)
    a = -a if flip else a
    assert bimodality_coefficient(a * x + c) == pytest.approx(bimodality_coefficient(x), rel=1e-6, abs=1e-9)


@settings(max_examples=100)
@given(samples, samples)
def test_bc_hom_negation_symmetry(x, y):
    n = min(x.size, y.size)
    x, y = x[:n], y[:n]
    assume(np.std(x + y) > 1e-3)
    assert bc_hom(-x, -y) == pytest.approx(bc_hom(x, y), rel=1e-9)


def test_bc_hom_of_identical_axes_equals_bc():
    rng = np.random.default_rng(2)
    b = np.concatenate([rng.normal(-0.7, 0.1, 500), rng.normal(0.7, 0.1, 500)])
    assert bc_hom(b, b) == pytest.approx(bimodality_coefficient(b), rel=1e-12)
    assert is_bimodal_pair(bc_hom(b, b), bimodality_coefficient(b))


def is_bimodal_pair(a, b):
    return (a > BIMODAL_THRESHOLD) == (b > BIMODAL_THRESHOLD)


def test_bc_hom_penalises_conflict():
    rng = np.random.default_rng(3)
    b = np.concatenate([rng.normal(-0.7, 0.1, 500), rng.normal(0.7, 0.1, 500)])
    b_nn = -b + rng.normal(0, 0.05, b.size)
    assert np.abs(diagonal_projection(b, b_nn)).mean() < 0.1
    assert bc_hom(b, b_nn) < bimodality_coefficient(b)


def test_diagonal_projection_is_first_rotated_axis():
    theta = np.pi / 4
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    pts = np.random.default_rng(4).uniform(-1, 1, (20, 2))
    assert np.allclose((pts @ R)[:, 0], diagonal_projection(pts[:, 0], pts[:, 1]))


def test_neighbor_mean():
    g = AdaptiveDigraph.from_edges(5, [(0, 1), (0, 2), (3, 4)])
    b = np.array([0.0, 0.2, 0.4, 0.0, -1.0])
    b_nn, has = neighbor_mean(g, b)
    assert b_nn[0] == pytest.approx(0.3)
    assert b_nn[3] == -1.0
    assert list(has) == [True, False, False, True, False]
    assert np.isnan(b_nn[1])


def test_density_map():
    dm = density_map(np.zeros(7), np.zeros(7), bins=50)
    assert dm.total == 7 and dm.grid[25, 25] == 7
    rng = np.random.default_rng(5)
    b = rng.uniform(-1, 1, 1000)
    b[:3] = 1.0
    dm = density_map(b, -b, bins=10)
    assert dm.total == 1000
    assert dm.grid[9, 0] >= 3
    with pytest.raises(ValueError):
        density_map(b, b, bins=1)


def test_density_map_quadrants_follow_alignment():
    rng = np.random.default_rng(6)
    b = np.concatenate([rng.uniform(-1, -0.3, 400), rng.uniform(0.3, 1, 400)])
    q = density_map(b, 0.8 * b, bins=50).quadrant_mass()
    assert q["q1"] + q["q3"] > q["q2"] + q["q4"]


def test_density_exports(tmp_path):
    dm = density_map(np.array([0.5, -0.5]), np.array([0.5, -0.5]), bins=4)
    dm.write_csv(tmp_path / "d.csv")
    dm.write_pgm(tmp_path / "d.pgm")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "b,b_nn,count" and len(lines) == 17
    assert sum(int(l.split(",")[2]) for l in lines[1:]) == 2
    pgm = (tmp_path / "d.pgm").read_text().split("\n")
    assert pgm[:3] == ["P2", "4 4", "255"]
    # b=+0.5, b_nn=+0.5 sits in the last bin of both axes: top row, last column
    assert pgm[3].split() == ["0", "0", "0", "255"]
    # -0.5 is the left edge of bin 1
    assert pgm[5].split() == ["0", "255", "0", "0"]


def test_stubborn_edge_fraction():
    g = AdaptiveDigraph.from_edges(3, [(0, 1), (1, 2)])
    assert stubborn_edge_fraction(g, [False] * 3) == (0.0, 1.0)
    assert stubborn_edge_fraction(g, [True] * 3) == (1.0, 0.0)
    # 10 edges, stubborn node 0 touches 4
    edges = [(0, 1), (2, 0), (0, 3), (4, 0), (1, 2), (2, 3), (3, 4), (4, 5), (5, 1), (1, 3)]
    g = AdaptiveDigraph.from_edges(6, edges)
    stub = np.zeros(6, dtype=bool)
    stub[0] = True
    f, per = stubborn_edge_fraction(g, stub)
    assert f == pytest.approx(0.4) and per == pytest.approx(0.6)
    with pytest.raises(ValueError):
        stubborn_edge_fraction(AdaptiveDigraph.from_edges(2, []), [True, False])


def test_measure_snapshot_restricts_to_normal_users():
    rng = np.random.default_rng(7)
    n = 400
    edges = [(i, (i + k) % n) for i in range(n) for k in (1, 2, 3)]
    g = AdaptiveDigraph.from_edges(n, edges)
    b = rng.uniform(-1, 1, n)
    stub = np.zeros(n, dtype=bool)
    stub[:40] = True
    b[:40] = 1.0
    m = measure_snapshot(g, b, np.zeros(n, dtype=bool), stub)
    assert m["bc"] == pytest.approx(bimodality_coefficient(b[40:]))
    assert m["bc_all"] == pytest.approx(bimodality_coefficient(b))
    b_nn, _ = neighbor_mean(g, b)
    assert m["bc_hom"] == pytest.approx(bc_hom(b[40:], b_nn[40:]))
