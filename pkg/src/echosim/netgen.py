"""Initial networks: randomly oriented Erdos-Renyi and a directed power-law configuration model."""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .graph import AdaptiveDigraph

logger = logging.getLogger(__name__)


class GraphicalityError(RuntimeError):
    """Stub matching could not produce a simple digraph."""


def _pair_from_index(idx: np.ndarray, n: int):
    """Map linear indices of the strict upper triangle (row-major) to ``(u, v)``, ``u < v``."""
    # row u starts at u*(2n-u-1)/2
    idx = idx.astype(np.float64)
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * idx)) / 2).astype(np.int64)
    start = u * (2 * n - u - 1) // 2
    # float rounding near row boundaries
    over = start > idx
    u[over] -= 1
    start = u * (2 * n - u - 1) // 2
    under = idx >= start + (n - 1 - u)
    u[under] += 1
    start = u * (2 * n - u - 1) // 2
    v = (idx - start).astype(np.int64) + u + 1
    return u, v


def generate_er_directed(n: int, p: float, rng) -> AdaptiveDigraph:
    """Undirected G(n, p) with every edge then oriented by a fair coin."""
    if n < 2:
        raise ValueError("ER generator needs n >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    pairs = n * (n - 1) // 2
    m = int(rng.binomial(pairs, p))
    idx = np.sort(rng.choice(pairs, size=m, replace=False)) if m < pairs else np.arange(pairs)
    u, v = _pair_from_index(idx, n)
    flip = rng.random(m) < 0.5
    src = np.where(flip, v, u)
    dst = np.where(flip, u, v)
    return AdaptiveDigraph(n, src, dst)


def powerlaw_pmf(lam: float, kmin: int, kmax: int) -> np.ndarray:
    k = np.arange(kmin, kmax + 1, dtype=np.float64)
    w = k ** (-lam)
    return w / w.sum()


def sample_powerlaw_degrees(n: int, lam: float, kmin: int, rng, kmax: int | None = None) -> np.ndarray:
    """Inverse-CDF draws from P(k) ~ k^-lam on ``kmin..kmax`` (default ``kmax = n-1``)."""
    kmax = n - 1 if kmax is None else kmax
    if kmax < kmin:
        raise ValueError("kmax must be >= kmin")
    cdf = np.cumsum(powerlaw_pmf(lam, kmin, kmax))
    cdf[-1] = 1.0
    return kmin + np.searchsorted(cdf, rng.random(n), side="right")


def reconcile_sums(d_out: np.ndarray, d_in: np.ndarray, lam: float, kmin: int, rng,
                   max_attempts: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Resample entries of the heavier sequence until both sums agree.

    Redraws that would overshoot are discarded. After ``max_attempts`` the
    largest entries of the heavier sequence are decremented one unit at a time.
    """
    d_out, d_in = d_out.copy(), d_in.copy()
    n = d_out.size
    kmax = n - 1
    for _ in range(max_attempts):
        diff = int(d_out.sum() - d_in.sum())
        if diff == 0:
            return d_out, d_in
        heavy = d_out if diff > 0 else d_in
        gap = abs(diff)
        i = int(rng.integers(n))
        new = int(sample_powerlaw_degrees(1, lam, kmin, rng, kmax)[0])
        if 0 < heavy[i] - new <= gap:
            heavy[i] = new
    diff = int(d_out.sum() - d_in.sum())
    heavy = d_out if diff > 0 else d_in
    for _ in range(abs(diff)):
        i = int(np.argmax(heavy))
        if heavy[i] <= kmin:
            raise GraphicalityError("cannot reconcile degree sums without going below kmin")
        heavy[i] -= 1
    return d_out, d_in


def _bad_pairs(src, dst, n):
    bad = src == dst
    key = src * n + dst
    order = np.argsort(key, kind="stable")
    dup = np.zeros_like(bad)
    ks = key[order]
    dup[order[1:]] = ks[1:] == ks[:-1]
    return np.flatnonzero(bad | dup)


def stub_match(d_out: np.ndarray, d_in: np.ndarray, rng, max_rounds: int = 1000) -> AdaptiveDigraph:
    """Directed configuration model with self-loop and multi-edge rejection.

    In-stubs are shuffled once; every offending pair then swaps its in-stub
    with a uniformly chosen edge until no offending pair is left.
    """
    d_out = np.asarray(d_out, dtype=np.int64)
    d_in = np.asarray(d_in, dtype=np.int64)
    if d_out.sum() != d_in.sum():
        raise ValueError("in- and out-degree sums differ")
    n = d_out.size
    if np.any(d_out > n - 1) or np.any(d_in > n - 1):
        raise GraphicalityError("a degree exceeds n-1")
    src = np.repeat(np.arange(n), d_out)
    dst = rng.permutation(np.repeat(np.arange(n), d_in))
    E = src.size
    for _ in range(max_rounds):
        bad = _bad_pairs(src, dst, n)
        if bad.size == 0:
            return AdaptiveDigraph(n, src, dst)
        partners = rng.integers(E, size=bad.size)
        for a, c in zip(bad.tolist(), partners.tolist()):
            dst[a], dst[c] = dst[c], dst[a]
    raise GraphicalityError(f"no simple digraph after {max_rounds} rounds")


def generate_sf_directed(n: int, lam: float, kmin: int, rng) -> AdaptiveDigraph:
    """Configuration model whose in- and out-degrees are independent power-law draws."""
    if lam <= 2:
        raise ValueError("lambda must exceed 2")
    if kmin < 1 or kmin > n - 1:
        raise ValueError("kmin must lie in [1, n-1]")
    d_out = sample_powerlaw_degrees(n, lam, kmin, rng)
    d_in = sample_powerlaw_degrees(n, lam, kmin, rng)
    d_out, d_in = reconcile_sums(d_out, d_in, lam, kmin, rng)
    return stub_match(d_out, d_in, rng)


def generate(spec: dict, n: int, rng) -> AdaptiveDigraph:
    """Dispatch on ``spec['model']`` (``'er'`` with ``p``, ``'sf'`` with ``lambda``/``kmin``)."""
    model = spec.get("model", "er")
    if model == "er":
        return generate_er_directed(n, float(spec["p"]), rng)
    if model == "sf":
        return generate_sf_directed(n, float(spec.get("lambda", 2.43)), int(spec.get("kmin", 3)), rng)
    raise ValueError(f"unknown network model {model!r}")


def write_sidecar(path, **meta) -> None:
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
