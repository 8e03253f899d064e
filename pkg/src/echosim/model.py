"""Opinion dynamics with priority, stubborn and ideologue users."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .graph import AdaptiveDigraph

CONTROVERSIAL = "controversial"
ALIGNED = "aligned"
POSTING_RULES = (CONTROVERSIAL, ALIGNED)

PHI_POLARIZED = 0.785
PHI_CONSENSUS = 1.473


def _check_opinion(name, x):
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"{name}={x} outside [-1, 1]")


def posting_prob_controversial(theta: float, b_i: float) -> float:
    _check_opinion("theta", theta)
    _check_opinion("b_i", b_i)
    return float(K.p_controversial(theta, b_i))


def posting_prob_aligned(theta: float, b_i: float) -> float:
    _check_opinion("theta", theta)
    _check_opinion("b_i", b_i)
    return float(K.p_aligned(theta, b_i))


def receive_prob(b_i: float, b_j: float, phi: float, sender_is_priority: bool = False) -> float:
    """Chance that follower ``j`` sees a post by ``i``; priority posts always arrive."""
    _check_opinion("b_i", b_i)
    _check_opinion("b_j", b_j)
    if not 0.0 <= phi <= math.pi:
        raise ValueError(f"phi={phi} outside [0, pi]")
    if sender_is_priority:
        return 1.0
    return float(K.p_receive(b_i, b_j, phi))


def repulsion_prob(b_j: float, theta: float) -> float:
    return abs(theta - b_j) / 2.0


def realign(b_j: float, theta: float, delta: float, rng) -> float:
    """Move a non-stubborn receiver after reading ``theta``.

    ``rng`` is a ``numpy.random.Generator`` or a float already drawn from U[0, 1).
    """
    u = rng if isinstance(rng, float) else float(rng.random())
    return float(K.realign(b_j, theta, delta, u))


def rewire_prob(b_i: float, b_j: float) -> float:
    _check_opinion("b_i", b_i)
    _check_opinion("b_j", b_j)
    return float(K.p_rewire(b_i, b_j))


@dataclass(frozen=True)
class UserKind:
    priority: bool = False
    stubborn: bool = False

    @property
    def ideologue(self) -> bool:
        return self.priority and self.stubborn

    @property
    def normal(self) -> bool:
        return not (self.priority or self.stubborn)


@dataclass
class ModelParams:
    phi: float = PHI_POLARIZED
    delta: float = 0.1
    iterations: int = 10**8

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0.0 <= self.phi <= math.pi:
            raise ValueError(f"phi={self.phi} outside [0, pi]")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")


@dataclass
class OpinionState:
    """Per-node opinions, user kinds and posting rule (``aligned[i]`` True for aligned posting)."""

    opinions: np.ndarray
    priority: np.ndarray
    stubborn: np.ndarray
    aligned: np.ndarray

    def __post_init__(self):
        self.opinions = np.ascontiguousarray(self.opinions, dtype=np.float64)
        n = self.opinions.shape[0]
        for name in ("priority", "stubborn", "aligned"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.bool_)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
            setattr(self, name, arr)
        if np.any(np.abs(self.opinions) > 1.0):
            raise ValueError("opinions must lie in [-1, 1]")

    @classmethod
    def uniform(cls, n: int, rng) -> "OpinionState":
        """All-normal population with U[-1, 1] opinions and controversial posting."""
        z = np.zeros(n, dtype=bool)
        return cls(rng.uniform(-1.0, 1.0, n), z, z.copy(), z.copy())

    @property
    def n(self) -> int:
        return int(self.opinions.shape[0])

    def kind(self, i: int) -> UserKind:
        return UserKind(bool(self.priority[i]), bool(self.stubborn[i]))

    @property
    def normal(self) -> np.ndarray:
        return ~(self.priority | self.stubborn)

    def copy(self) -> "OpinionState":
        return OpinionState(self.opinions.copy(), self.priority.copy(),
                            self.stubborn.copy(), self.aligned.copy())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "opinion", "priority", "stubborn"])
            for i, (b, p, s) in enumerate(zip(self.opinions.tolist(), self.priority.tolist(),
                                              self.stubborn.tolist())):
                w.writerow([i, repr(b), int(p), int(s)])

    @classmethod
    def read_csv(cls, path, aligned_stubborn: bool = True) -> "OpinionState":
        """Load a snapshot; posting rules are not stored, stubborn users get aligned posting by default."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        ids = np.array([int(r["id"]) for r in rows])
        if not np.array_equal(ids, np.arange(len(rows))):
            raise ValueError(f"{path}: ids must be 0..n-1 in order")
        b = np.array([float(r["opinion"]) for r in rows])
        pr = np.array([r["priority"].strip() in ("1", "True", "true") for r in rows])
        st = np.array([r["stubborn"].strip() in ("1", "True", "true") for r in rows])
        return cls(b, pr, st, st.copy() if aligned_stubborn else np.zeros_like(st))


def init_state(n: int, rng, *, priority_fraction: float = 0.0, stubborn_fraction: float = 0.0,
               stubborn_profile: str = "extremist", stubborn_are_priority: bool = False,
               priority_posting: str = CONTROVERSIAL,
               stubborn_posting: str = ALIGNED, opinions=None) -> OpinionState:
    """Fresh population: uniform opinions plus the requested special users.

    Ideologue mode draws the stubborn users among the priority users; otherwise
    stubborn users are drawn among the non-priority ones. Extremist stubborn
    users alternate between +1 and -1, centrists sit at 0. Passing
    ``opinions`` starts from those values instead of a uniform draw.
    """
    for name, f in (("priority_fraction", priority_fraction), ("stubborn_fraction", stubborn_fraction)):
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    if stubborn_profile not in ("extremist", "centrist"):
        raise ValueError(f"unknown stubborn profile {stubborn_profile!r}")
    if priority_posting not in POSTING_RULES or stubborn_posting not in POSTING_RULES:
        raise ValueError("posting rule must be 'aligned' or 'controversial'")

    n_pri = int(round(priority_fraction * n))
    n_stu = int(round(stubborn_fraction * n))
    if stubborn_are_priority and n_stu > n_pri:
        raise ValueError("ideologue mode needs stubborn_fraction <= priority_fraction")
    if not stubborn_are_priority and n_stu + n_pri > n:
        raise ValueError("priority and stubborn users do not fit in the population")

    if opinions is None:
        b = rng.uniform(-1.0, 1.0, n)
    else:
        b = np.array(opinions, dtype=np.float64)
        if b.shape != (n,):
            raise ValueError(f"opinions must have shape ({n},)")
    perm = rng.permutation(n)
    pri_ids = perm[:n_pri]
    if stubborn_are_priority:
        # perm is already uniform, so a prefix of the priority ids is a uniform subset
        stu_ids = pri_ids[:n_stu]
    else:
        stu_ids = perm[n_pri:n_pri + n_stu]

    priority = np.zeros(n, dtype=bool)
    stubborn = np.zeros(n, dtype=bool)
    aligned = np.zeros(n, dtype=bool)
    priority[pri_ids] = True
    stubborn[stu_ids] = True
    if priority_posting == ALIGNED:
        aligned[pri_ids] = True
    aligned[stu_ids] = stubborn_posting == ALIGNED
    if stubborn_profile == "centrist":
        b[stu_ids] = 0.0
    else:
        b[stu_ids] = np.where(np.arange(n_stu) % 2 == 0, 1.0, -1.0)
    return OpinionState(b, priority, stubborn, aligned)


@dataclass
class RunStats:
    """Event counters accumulated by the kernel."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros(K.N_STATS, dtype=np.int64))

    def __getattr__(self, name):
        idx = {"events": K.STAT_EVENTS, "posts": K.STAT_POSTS, "receipts": K.STAT_RECEIPTS,
               "repulsions": K.STAT_REPULSIONS, "rewires": K.STAT_REWIRES,
               "priority_posts": K.STAT_PRIORITY_POSTS,
               "priority_receipts": K.STAT_PRIORITY_RECEIPTS,
               "priority_audience": K.STAT_PRIORITY_AUDIENCE}
        if name in idx:
            return int(self.counts[idx[name]])
        raise AttributeError(name)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("events", "posts", "receipts", "repulsions", "rewires",
                                              "priority_posts", "priority_receipts", "priority_audience")}


class Simulation:
    """Mutable (state, graph) pair advanced by the event kernel."""

    def __init__(self, state: OpinionState, graph: AdaptiveDigraph, params: ModelParams, rng):
        if state.n != graph.n:
            raise ValueError(f"state has {state.n} nodes but graph has {graph.n}")
        self.state = state
        self.graph = graph
        self.params = params
        self.rng = rng
        self.stats = RunStats()
        self._scratch = np.empty(max(graph.n, 1), dtype=np.int64)

    def advance(self, events: int) -> None:
        g, s = self.graph, self.state
        K.simulate(g.out_ptr, g.src, g.dst, g.in_head, g.in_next, g.in_prev, g.in_deg,
                   s.opinions, s.priority, s.stubborn, s.aligned,
                   float(self.params.delta), float(self.params.phi), int(events), self.rng,
                   self._scratch, self.stats.counts)

    def step(self) -> None:
        self.advance(1)

    def run(self, iterations: Optional[int] = None, *, check_every: int = 0,
            callback: Optional[Callable[["Simulation", int], None]] = None) -> "Simulation":
        """Execute the event budget; ``callback(sim, done)`` fires every ``check_every`` events."""
        total = self.params.iterations if iterations is None else int(iterations)
        if callback is None or check_every <= 0:
            self.advance(total)
            return self
        done = 0
        while done < total:
            chunk = min(check_every, total - done)
            self.advance(chunk)
            done += chunk
            callback(self, done)
        return self


def step(state: OpinionState, graph: AdaptiveDigraph, params: ModelParams, rng) -> RunStats:
    """One activation event, mutating ``state`` and ``graph`` in place."""
    sim = Simulation(state, graph, params, rng)
    sim.step()
    return sim.stats


def run(state: OpinionState, graph: AdaptiveDigraph, params: ModelParams, rng, **kwargs) -> Simulation:
    """Run ``params.iterations`` events in place and return the simulation handle."""
    return Simulation(state, graph, params, rng).run(**kwargs)
