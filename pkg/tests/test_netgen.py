import numpy as np
import pytest

from echosim.netgen import (GraphicalityError, _pair_from_index, generate_er_directed, generate_sf_directed,
                            powerlaw_pmf, reconcile_sums, sample_powerlaw_degrees, stub_match)


def _simple(g):
    e = g.edges()
    assert not np.any(e[:, 0] == e[:, 1])
    assert np.unique(e[:, 0] * g.n + e[:, 1]).size == len(e)
    # an ER orientation never yields both directions of one pair
    return e


@pytest.mark.parametrize("n", [2, 3, 7, 50, 1001])
def test_pair_index_matches_triu(n):
    u, v = np.triu_indices(n, k=1)
    pu, pv = _pair_from_index(np.arange(n * (n - 1) // 2), n)
    assert np.array_equal(pu, u) and np.array_equal(pv, v)


def test_er_empty_and_complete():
    assert generate_er_directed(100, 0.0, np.random.default_rng(0)).edge_count == 0
    g = generate_er_directed(100, 1.0, np.random.default_rng(0))
    assert g.edge_count == 100 * 99 // 2
    assert np.all(g.in_degree() + g.out_degree() == 99)
    _simple(g)


def test_er_rejects_tiny_graph():
    with pytest.raises(ValueError):
        generate_er_directed(1, 0.5, np.random.default_rng(0))


def test_er_paper_density():
    g = generate_er_directed(10_000, 1.6e-3, np.random.default_rng(1))
    assert g.in_degree().mean() == pytest.approx(8.0, abs=0.15)
    assert g.out_degree().mean() == pytest.approx(8.0, abs=0.15)
    e = _simple(g)
    assert np.unique(np.minimum(e[:, 0], e[:, 1]) * g.n + np.maximum(e[:, 0], e[:, 1])).size == len(e)


def test_er_edge_count_within_three_sd():
    n, p = 400, 0.02
    pairs = n * (n - 1) / 2
    mu, sd = p * pairs, np.sqrt(pairs * p * (1 - p))
    counts = np.array([generate_er_directed(n, p, np.random.default_rng(s)).edge_count for s in range(100)])
    assert np.all(np.abs(counts - mu) < 3 * sd)
    # orientation is a fair coin: out-degree share of the lower id is about 1/2
    g = generate_er_directed(n, p, np.random.default_rng(0))
    e = g.edges()
    assert (e[:, 0] < e[:, 1]).mean() == pytest.approx(0.5, abs=0.05)


def test_powerlaw_sampler_matches_pmf():
    rng = np.random.default_rng(2)
    d = sample_powerlaw_degrees(200_000, 2.43, 3, rng, kmax=50)
    pmf = powerlaw_pmf(2.43, 3, 50)
    freq = np.bincount(d, minlength=51)[3:] / d.size
    assert d.min() >= 3 and d.max() <= 50
    assert np.max(np.abs(freq - pmf)) < 0.005


def test_sf_degree_statistics():
    g = generate_sf_directed(10_000, 2.43, 3, np.random.default_rng(0))
    _simple(g)
    mean = g.edge_count / g.n
    assert mean == pytest.approx(8.0, abs=1.0)
    assert g.in_degree().min() >= 3 and g.out_degree().min() >= 3
    assert g.in_degree().sum() == g.out_degree().sum() == g.edge_count
    d = g.in_degree()
    ks = np.arange(3, 200)
    ccdf = np.array([(d >= k).mean() for k in ks])
    slope = np.polyfit(np.log(ks[ccdf > 0]), np.log(ccdf[ccdf > 0]), 1)[0]
    # CCDF of k^-lam decays as k^-(lam-1)
    assert 1.0 - slope == pytest.approx(2.43, abs=0.3)


def test_degenerate_sequence_gives_regular_digraph():
    rng = np.random.default_rng(3)
    d = sample_powerlaw_degrees(500, 2.43, 4, rng, kmax=4)
    g = stub_match(d, d.copy(), rng)
    assert np.all(g.in_degree() == 4) and np.all(g.out_degree() == 4)
    _simple(g)


def test_reconcile_sums():
    rng = np.random.default_rng(4)
    d_out = sample_powerlaw_degrees(1000, 2.43, 3, rng)
    d_in = sample_powerlaw_degrees(1000, 2.43, 3, rng)
    a, b = reconcile_sums(d_out, d_in, 2.43, 3, rng)
    assert a.sum() == b.sum()
    assert a.min() >= 3 and b.min() >= 3


def test_stub_match_rejects_bad_input():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        stub_match(np.array([1, 1]), np.array([1, 2]), rng)
    with pytest.raises(GraphicalityError):
        stub_match(np.array([3, 0, 0]), np.array([1, 1, 1]), rng)
