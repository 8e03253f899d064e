"""Directed followership graph with constant out-degrees and O(1) retargeting.

An edge ``j -> i`` means ``j`` follows ``i``; posts by ``i`` travel to ``j``.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import _kernels as K


class EdgeError(ValueError):
    """A mutation would break the graph invariants."""


class AdaptiveDigraph:
    """Followership graph over dense node ids ``0..n-1``.

    Out-edges are stored per follower in a fixed CSR block (out-degrees never
    change); in-edges are intrusive linked lists so moving one edge between
    followees costs O(1).
    """

    def __init__(self, n: int, src, dst):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if n < 1:
            raise ValueError("node count must be positive")
        if src.shape != dst.shape or src.ndim != 1:
            raise ValueError("src and dst must be 1-D arrays of equal length")
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(src == dst):
            raise EdgeError("self-loops are not allowed")
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        if src.size > 1 and np.any((src[1:] == src[:-1]) & (dst[1:] == dst[:-1])):
            raise EdgeError("duplicate edges are not allowed")

        self.n = int(n)
        self.src = src
        self.dst = dst
        self.out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self.out_ptr[1:])
        self.in_head, self.in_next, self.in_prev, self.in_deg = K.build_in_lists(self.n, self.dst)

    @classmethod
    def from_edges(cls, n: int, edges) -> "AdaptiveDigraph":
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        return cls(n, arr[:, 0], arr[:, 1])

    @property
    def edge_count(self) -> int:
        return int(self.dst.shape[0])

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    def in_degree(self) -> np.ndarray:
        return self.in_deg.copy()

    def _check_node(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range [0, {self.n})")
        return i

    def followers(self, i: int) -> list[int]:
        i = self._check_node(i)
        out = []
        e = self.in_head[i]
        while e >= 0:
            out.append(int(self.src[e]))
            e = self.in_next[e]
        return out

    def followees(self, j: int) -> list[int]:
        j = self._check_node(j)
        return self.dst[self.out_ptr[j]:self.out_ptr[j + 1]].tolist()

    def has_edge(self, j: int, i: int) -> bool:
        j, i = self._check_node(j), self._check_node(i)
        return bool(K.follows(self.out_ptr, self.dst, j, i))

    def retarget_edge(self, follower: int, old_target: int, new_target: int) -> None:
        """Point ``follower``'s edge at ``old_target`` to ``new_target`` instead."""
        j = self._check_node(follower)
        old = self._check_node(old_target)
        new = self._check_node(new_target)
        lo, hi = self.out_ptr[j], self.out_ptr[j + 1]
        hits = np.flatnonzero(self.dst[lo:hi] == old)
        if hits.size == 0:
            raise EdgeError(f"edge {j}->{old} does not exist")
        if new == j:
            raise EdgeError(f"retarget {j}->{new} would create a self-loop")
        if K.follows(self.out_ptr, self.dst, j, new):
            raise EdgeError(f"edge {j}->{new} already exists")
        K.move_edge(lo + int(hits[0]), new, self.dst,
                    self.in_head, self.in_next, self.in_prev, self.in_deg)

    def edges(self) -> np.ndarray:
        """``(E, 2)`` array of ``(src, dst)`` sorted lexicographically."""
        arr = np.column_stack((self.src, self.dst))
        return arr[np.lexsort((arr[:, 1], arr[:, 0]))]

    def copy(self) -> "AdaptiveDigraph":
        g = object.__new__(AdaptiveDigraph)
        g.n = self.n
        for name in ("src", "dst", "out_ptr", "in_head", "in_next", "in_prev", "in_deg"):
            setattr(g, name, getattr(self, name).copy())
        return g

    def check_consistency(self) -> None:
        """Full scan of every invariant; raises ``AssertionError`` on the first breach."""
        n, E = self.n, self.edge_count
        assert np.all(self.src == np.repeat(np.arange(n), np.diff(self.out_ptr))), "src/out_ptr mismatch"
        assert not np.any(self.src == self.dst), "self-loop present"
        key = self.src * n + self.dst
        assert np.unique(key).size == E, "duplicate edge present"
        seen = np.zeros(E, dtype=bool)
        for i in range(n):
            e, prev, count = self.in_head[i], -1, 0
            while e >= 0:
                assert self.dst[e] == i, f"edge {e} listed under {i} but points at {self.dst[e]}"
                assert self.in_prev[e] == prev, f"broken back link at edge {e}"
                assert not seen[e], f"edge {e} listed twice"
                seen[e] = True
                prev, e = e, self.in_next[e]
                count += 1
            assert count == self.in_deg[i], f"in_deg[{i}] stale"
        assert seen.all(), "edge missing from every in-list"
        assert self.in_deg.sum() == E == self.out_degree().sum()

    def write_edgelist(self, path) -> None:
        """``src<TAB>dst`` per line, sorted, meaning src follows dst."""
        lines = "".join(f"{s}\t{d}\n" for s, d in self.edges().tolist())
        Path(path).write_text(lines, encoding="ascii")

    @classmethod
    def read_edgelist(cls, path, n: int | None = None) -> "AdaptiveDigraph":
        text = Path(path).read_text(encoding="ascii")
        rows = [ln.split("\t") for ln in text.splitlines() if ln.strip()]
        try:
            arr = np.array([(int(a), int(b)) for a, b in rows], dtype=np.int64).reshape(-1, 2)
        except ValueError as exc:
            raise ValueError(f"{path}: malformed edge line") from exc
        if n is None:
            n = int(arr.max()) + 1 if arr.size else 1
        return cls(n, arr[:, 0], arr[:, 1])
