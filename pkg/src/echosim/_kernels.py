"""Hot loops. Every function here compiles under numba or runs as plain Python.

Graph layout shared by all kernels (edge ids are positions in ``dst``):

* ``out_ptr[j]:out_ptr[j+1]`` is the block of edges owned by follower ``j``;
  ``src[e]`` never changes, ``dst[e]`` is the followee and is what a rewire
  changes.
* in-lists are intrusive doubly linked lists over edge ids:
  ``in_head[i]`` is the first edge pointing at ``i``, ``in_next``/``in_prev``
  chain the rest (-1 terminates), ``in_deg[i]`` is the list length.

Randomness comes only from ``rng.random()`` on a ``numpy.random.Generator``,
which numba reads through the same bit generator, so both backends consume
an identical stream.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import jit

HALF_PI = math.pi / 2.0

# slots of the per-run counter array
STAT_EVENTS = 0
STAT_POSTS = 1
STAT_RECEIPTS = 2
STAT_REPULSIONS = 3
STAT_REWIRES = 4
STAT_PRIORITY_POSTS = 5
STAT_PRIORITY_RECEIPTS = 6
STAT_PRIORITY_AUDIENCE = 7
N_STATS = 8


@jit
def p_controversial(theta, b):
    x = math.cos(HALF_PI * abs(theta - b))
    return x * x


@jit
def p_aligned(theta, b):
    d = abs(theta - b)
    if d > 1.0:
        return 0.0
    x = math.cos(HALF_PI * d)
    return x * x


@jit
def p_receive(b_sender, b_follower, phi):
    x = math.cos(HALF_PI * abs(b_sender - b_follower) + phi)
    return x * x


@jit
def p_rewire(b_sender, b_follower):
    d = abs(b_sender - b_follower) - 1.0
    if d > 0.0:
        return d
    return 0.0


@jit
def realign(b, theta, delta, u):
    """New opinion of a receiver at ``b`` after reading a post ``theta``.

    ``u`` is a uniform draw; the receiver is pushed away when ``u`` falls
    below half the distance, pulled toward the post otherwise.
    """
    d = abs(theta - b)
    if u < 0.5 * d:
        if b > theta:
            b = b + delta
        else:
            b = b - delta
        if b > 1.0:
            b = 1.0
        elif b < -1.0:
            b = -1.0
        return b
    if d <= delta:
        return theta
    if theta > b:
        return b + delta
    return b - delta


@jit
def unlink_in(e, target, in_head, in_next, in_prev, in_deg):
    prv = in_prev[e]
    nxt = in_next[e]
    if prv >= 0:
        in_next[prv] = nxt
    else:
        in_head[target] = nxt
    if nxt >= 0:
        in_prev[nxt] = prv
    in_next[e] = -1
    in_prev[e] = -1
    in_deg[target] -= 1


@jit
def link_in(e, target, in_head, in_next, in_prev, in_deg):
    head = in_head[target]
    in_prev[e] = -1
    in_next[e] = head
    if head >= 0:
        in_prev[head] = e
    in_head[target] = e
    in_deg[target] += 1


@jit
def move_edge(e, new_target, dst, in_head, in_next, in_prev, in_deg):
    unlink_in(e, dst[e], in_head, in_next, in_prev, in_deg)
    dst[e] = new_target
    link_in(e, new_target, in_head, in_next, in_prev, in_deg)


@jit
def follows(out_ptr, dst, j, k):
    for e in range(out_ptr[j], out_ptr[j + 1]):
        if dst[e] == k:
            return True
    return False


@jit
def build_in_lists(n, dst):
    in_head = np.full(n, -1, dtype=np.int64)
    in_next = np.full(dst.shape[0], -1, dtype=np.int64)
    in_prev = np.full(dst.shape[0], -1, dtype=np.int64)
    in_deg = np.zeros(n, dtype=np.int64)
    # reverse insertion keeps each in-list in ascending edge order
    for e in range(dst.shape[0] - 1, -1, -1):
        link_in(e, dst[e], in_head, in_next, in_prev, in_deg)
    return in_head, in_next, in_prev, in_deg


@jit
def draw_new_target(out_ptr, dst, j, n, rng):
    """Uniform node that ``j`` neither is nor already follows; -1 if none exists."""
    if out_ptr[j + 1] - out_ptr[j] >= n - 1:
        return -1
    while True:
        k = int(rng.random() * n)
        if k >= n:
            k = n - 1
        if k != j and not follows(out_ptr, dst, j, k):
            return k


@jit
def simulate(out_ptr, src, dst, in_head, in_next, in_prev, in_deg,
             b, priority, stubborn, aligned, delta, phi, iterations, rng,
             scratch, stats):
    """Run ``iterations`` activation events in place."""
    n = b.shape[0]
    for _ in range(iterations):
        stats[STAT_EVENTS] += 1
        i = int(rng.random() * n)
        if i >= n:
            i = n - 1
        theta = 2.0 * rng.random() - 1.0
        if aligned[i]:
            p_post = p_aligned(theta, b[i])
        else:
            p_post = p_controversial(theta, b[i])
        if rng.random() >= p_post:
            continue
        stats[STAT_POSTS] += 1

        # followers can leave i while we iterate, so walk a frozen copy
        m = 0
        e = in_head[i]
        while e >= 0:
            scratch[m] = e
            m += 1
            e = in_next[e]
        is_priority = priority[i]
        if is_priority:
            stats[STAT_PRIORITY_POSTS] += 1
            stats[STAT_PRIORITY_AUDIENCE] += m

        b_i = b[i]
        for q in range(m):
            e = scratch[q]
            j = src[e]
            if not is_priority:
                if rng.random() >= p_receive(b_i, b[j], phi):
                    continue
            stats[STAT_RECEIPTS] += 1
            if is_priority:
                stats[STAT_PRIORITY_RECEIPTS] += 1
            if not stubborn[j]:
                u = rng.random()
                if u < 0.5 * abs(theta - b[j]):
                    stats[STAT_REPULSIONS] += 1
                b[j] = realign(b[j], theta, delta, u)
            p_w = p_rewire(b_i, b[j])
            if p_w > 0.0 and rng.random() < p_w:
                k = draw_new_target(out_ptr, dst, j, n, rng)
                if k >= 0:
                    move_edge(e, k, dst, in_head, in_next, in_prev, in_deg)
                    stats[STAT_REWIRES] += 1
